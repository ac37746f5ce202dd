#pragma once

// Deterministic random generators for the verification suites: cone members,
// admissible spectra and admissible symmetric matrices.  Everything is fed
// from a caller-owned engine so a fixed seed reproduces a run bit for bit.

#include <hessquot/quotient_operator.hpp>
#include <hessquot/symmetric_functions.hpp>

#include <Eigen/Dense>

#include <random>
#include <utility>
#include <vector>

namespace hessquot::sampling {

using Rng = std::mt19937_64;

inline Spectrum uniform_spectrum(Rng& rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Spectrum lam(n);
    for (int i = 0; i < n; ++i) lam[i] = dist(rng);
    return lam;
}

/// Scale-free cone margin: min over i <= k of sigma_i(eta) normalized by its
/// all-equal ceiling C(n,i) * max|eta|^i.  Lies in (0, 1] inside Gamma_k and
/// is invariant under eta -> t * eta.
inline double normalized_cone_margin(const Spectrum& eta, int k) {
    const Eigen::VectorXd e = elementary_symmetric_all(eta, k);
    const double amp = std::max(eta.cwiseAbs().maxCoeff(), 1e-300);
    double m = std::numeric_limits<double>::infinity();
    double pw = 1.0;
    for (int i = 1; i <= k; ++i) {
        pw *= amp;
        m = std::min(m, e[i] / (binomial(int(eta.size()), i) * pw));
    }
    return m;
}

/// Rejection-sampled member of Gamma_k: a positive backbone plus a signed
/// perturbation whose amplitude shrinks until the sample lands inside.
inline Spectrum gamma_k_member(Rng& rng, int n, int k, double margin_floor = 0.0) {
    std::uniform_real_distribution<double> base(0.25, 2.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double spread = 0.9;
    for (int attempt = 0;; ++attempt) {
        Spectrum lam(n);
        for (int i = 0; i < n; ++i) lam[i] = base(rng) + spread * gauss(rng);
        if (in_gamma_k(lam, k).member &&
            normalized_cone_margin(lam, k) >= margin_floor)
            return lam;
        if (attempt % 64 == 63) spread *= 0.7;  // guarantees termination
    }
}

/// Rejection-sampled lam whose transformed spectrum lies in Gamma_k, with an
/// optional normalized margin floor applied to the transformed spectrum.
inline Spectrum admissible_spectrum(Rng& rng, const OperatorSpec& spec,
                                    double margin_floor = 0.0) {
    std::uniform_real_distribution<double> base(0.25, 2.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double spread = 0.9;
    for (int attempt = 0;; ++attempt) {
        Spectrum lam(spec.n);
        for (int i = 0; i < spec.n; ++i) lam[i] = base(rng) + spread * gauss(rng);
        const Spectrum eta = transformed_spectrum(lam, spec);
        if (in_gamma_k(eta, spec.k).member &&
            normalized_cone_margin(eta, spec.k) >= margin_floor)
            return lam;
        if (attempt % 64 == 63) spread *= 0.7;  // positive spectra always pass
    }
}

/// Haar-ish random rotation from the QR factorization of a Gaussian matrix.
inline Eigen::MatrixXd random_rotation(Rng& rng, int n) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    Eigen::MatrixXd Q = qr.householderQ();
    const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j)
        if (R(j, j) < 0.0) Q.col(j) *= -1.0;
    return Q;
}

/// Exactly symmetric matrix whose spectrum is admissible for spec.  With
/// repeat_eigenvalues the sampled spectrum is given duplicated entries before
/// rotation, so the degenerate code paths get exercised.
inline Eigen::MatrixXd admissible_matrix(Rng& rng, const OperatorSpec& spec,
                                         double margin_floor = 0.0,
                                         bool repeat_eigenvalues = false) {
    for (;;) {
        Spectrum lam = admissible_spectrum(rng, spec, margin_floor);
        if (repeat_eigenvalues) {
            lam[1] = lam[0];
            if (spec.n >= 4 && (rng() & 1u)) lam[3] = lam[2];
            const Spectrum eta = transformed_spectrum(lam, spec);
            if (!in_gamma_k(eta, spec.k).member ||
                normalized_cone_margin(eta, spec.k) < margin_floor)
                continue;  // duplication may have pushed it out; resample
        }
        const Eigen::MatrixXd Q = random_rotation(rng, spec.n);
        Eigen::MatrixXd M = Q * lam.asDiagonal() * Q.transpose();
        M = ((M + M.transpose()) / 2.0).eval();
        // Rounding in the similarity transform can nudge the spectrum; check
        // the actual eigenvalues before handing the matrix out.
        const Spectrum actual = SpectralData::analyze(M).eigenvalues;
        const Spectrum eta = transformed_spectrum(actual, spec);
        if (in_gamma_k(eta, spec.k).member &&
            normalized_cone_margin(eta, spec.k) >= margin_floor * 0.5)
            return M;
    }
}

/// Every (k, l) pair the operator family admits at this dimension and sign.
inline std::vector<std::pair<int, int>> legal_index_pairs(int n, int sign, double gamma) {
    std::vector<std::pair<int, int>> out;
    for (int k = 1; k <= n; ++k) {
        if (sign == -1 && k == n && !(gamma > 1.0)) continue;
        for (int l = 0; l < k; ++l) out.emplace_back(k, l);
    }
    return out;
}

}  // namespace hessquot::sampling
