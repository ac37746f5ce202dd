#pragma once

// The quotient operator on symmetric matrices.  A matrix M is mapped through
// its spectrum lam to the transformed spectrum
//     eta_i = gamma * sigma_1(lam) + sign * lam_i,
// and the operator value is sigma_k(eta) / sigma_l(eta), with the normalized
// form raised to the power 1/(k-l) so it is homogeneous of degree one.
// Admissibility means eta lies in Gamma_k.  All matrix derivatives are taken
// spectrally: eigen-decompose, differentiate in the eigenvalues, rotate back.

#include <hessquot/symmetric_functions.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace hessquot {

/// Parameter pack (n, k, l, gamma, sign) for one quotient operator.
///
/// sign = -1 selects U = gamma * tr(M) * I - M and requires gamma >= 1; the
/// top index k = n is additionally allowed only when gamma > 1.  sign = +1
/// selects U = gamma * tr(M) * I + M and requires gamma > 0.  In both cases
/// 0 <= l < k <= n and n >= 2.
struct OperatorSpec {
    int n = 0;
    int k = 0;
    int l = 0;
    double gamma = 1.0;
    int sign = -1;

    OperatorSpec(int n_, int k_, int l_, double gamma_, int sign_)
        : n(n_), k(k_), l(l_), gamma(gamma_), sign(sign_) {
        validate();
    }

    void validate() const {
        if (n < 2)
            throw std::invalid_argument("operator dimension must be >= 2, got " +
                                        std::to_string(n));
        if (sign != -1 && sign != 1)
            throw std::invalid_argument("operator sign must be -1 or +1");
        if (!(0 <= l && l < k && k <= n))
            throw std::invalid_argument("operator indices must satisfy 0 <= l < k <= n, got k=" +
                                        std::to_string(k) + " l=" + std::to_string(l) +
                                        " n=" + std::to_string(n));
        if (!std::isfinite(gamma))
            throw std::invalid_argument("operator gamma must be finite");
        if (sign == -1) {
            if (gamma < 1.0)
                throw std::invalid_argument("sign=-1 requires gamma >= 1");
            if (k == n && !(gamma > 1.0))
                throw std::invalid_argument("sign=-1 with k = n requires gamma > 1");
        } else {
            if (!(gamma > 0.0))
                throw std::invalid_argument("sign=+1 requires gamma > 0");
        }
    }

    int degree() const { return k - l; }
};

/// eta_i = gamma * sum(lam) + sign * lam_i.
inline Spectrum transformed_spectrum(const Spectrum& lam, const OperatorSpec& spec) {
    detail::require_spectrum(lam);
    if (lam.size() != spec.n)
        throw std::invalid_argument("spectrum dimension " + std::to_string(lam.size()) +
                                    " does not match operator dimension " +
                                    std::to_string(spec.n));
    const double s = lam.sum();
    return (spec.gamma * s + double(spec.sign) * lam.array()).matrix();
}

/// Gamma_k membership of the transformed spectrum, margins included.
inline ConeReport in_admissible_cone(const Spectrum& lam, const OperatorSpec& spec) {
    return in_gamma_k(transformed_spectrum(lam, spec), spec.k);
}

namespace detail {

inline Eigen::VectorXd admissible_sigmas(const Spectrum& lam, const OperatorSpec& spec,
                                         const char* who) {
    const Spectrum eta = transformed_spectrum(lam, spec);
    ConeReport rep = in_gamma_k(eta, spec.k);
    if (!rep.member)
        throw ConeViolation(std::string(who) +
                                ": transformed spectrum is not in Gamma_" +
                                std::to_string(spec.k) +
                                " (min sigma margin " + std::to_string(rep.min_margin()) + ")",
                            rep.margins);
    return elementary_symmetric_all(eta, spec.k);
}

}  // namespace detail

/// sigma_k(eta) / sigma_l(eta) evaluated on a spectrum.  Throws ConeViolation
/// outside the admissible cone.
inline double quotient_from_spectrum(const Spectrum& lam, const OperatorSpec& spec) {
    const Eigen::VectorXd e = detail::admissible_sigmas(lam, spec, "quotient");
    return e[spec.k] / e[spec.l];
}

/// Degree-one normalization: quotient value raised to 1/(k-l).
inline double normalized_from_spectrum(const Spectrum& lam, const OperatorSpec& spec) {
    return std::pow(quotient_from_spectrum(lam, spec), 1.0 / double(spec.degree()));
}

// ---------------------------------------------------------------------------
// Spectral decomposition with degeneracy bookkeeping.
// ---------------------------------------------------------------------------

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted
/// descending, the matching orthonormal frame, and clusters of numerically
/// coincident eigenvalues (split threshold 1e-12 * ||M||_F).  Per-eigenvalue
/// derivative weights get averaged within a cluster before being rotated
/// back, which keeps matrix derivatives well defined under degeneracy.
struct SpectralData {
    Spectrum eigenvalues;      // sorted descending
    Eigen::MatrixXd frame;     // column i pairs with eigenvalues[i]
    std::vector<std::vector<int>> clusters;

    static SpectralData analyze(const Eigen::MatrixXd& M) {
        const int n = int(M.rows());
        if (n < 2 || M.cols() != n)
            throw std::invalid_argument("spectral analysis requires a square matrix of dimension >= 2");
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < i; ++j)
                if (!(M(i, j) == M(j, i)))
                    throw std::invalid_argument(
                        "spectral analysis requires an exactly symmetric matrix");
        if (!M.allFinite())
            throw std::invalid_argument("matrix contains a non-finite entry");

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("eigen-decomposition failed to converge");

        SpectralData sd;
        sd.eigenvalues = es.eigenvalues().reverse();
        sd.frame = es.eigenvectors().rowwise().reverse();

        const double split = 1e-12 * M.norm();
        sd.clusters.push_back({0});
        for (int i = 1; i < n; ++i) {
            if (sd.eigenvalues[i - 1] - sd.eigenvalues[i] <= split)
                sd.clusters.back().push_back(i);
            else
                sd.clusters.push_back({i});
        }

        // Frame sanity: orthonormal and actually diagonalizing.
        const double scale = 1.0 + M.norm();
        if ((sd.frame.transpose() * sd.frame - Eigen::MatrixXd::Identity(n, n))
                .cwiseAbs()
                .maxCoeff() > 1e-10)
            throw std::runtime_error("spectral frame is not orthonormal");
        Eigen::MatrixXd D = sd.frame.transpose() * M * sd.frame;
        D.diagonal() -= sd.eigenvalues;
        if (D.cwiseAbs().maxCoeff() > 1e-10 * scale)
            throw std::runtime_error("spectral frame does not diagonalize the input");
        return sd;
    }
};

namespace detail {

/// d(sigma_k/sigma_l)(eta)/d eta_i for all i, given eta in Gamma_k.
inline Eigen::VectorXd quotient_eta_gradient(const Spectrum& eta, int k, int l) {
    const int n = int(eta.size());
    const Eigen::VectorXd e = elementary_symmetric_all(eta, std::max(k, l));
    const double sk = e[k], sl = e[l];
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) {
        const double dk = sigma_partial(eta, k, i);
        const double dl = (l >= 1) ? sigma_partial(eta, l, i) : 0.0;
        g[i] = (dk * sl - sk * dl) / (sl * sl);
    }
    return g;
}

}  // namespace detail

/// Operator value on a symmetric matrix (through its spectrum).
inline double quotient_value(const Eigen::MatrixXd& M, const OperatorSpec& spec) {
    return quotient_from_spectrum(SpectralData::analyze(M).eigenvalues, spec);
}

/// Normalized operator value on a symmetric matrix.
inline double normalized_value(const Eigen::MatrixXd& M, const OperatorSpec& spec) {
    return normalized_from_spectrum(SpectralData::analyze(M).eigenvalues, spec);
}

/// Matrix derivative of the operator at M: the symmetric matrix G with
/// dF = <G, dM> for symmetric perturbations dM.  Spectrally,
///     G = gamma * (sum_i g_i) * I + sign * Q diag(g) Q^T,
/// with g the eta-gradient of the quotient, cluster-averaged under
/// degeneracy.  With normalized = true the chain factor
/// (1/(k-l)) * F^(1/(k-l) - 1) is applied so G differentiates the
/// degree-one form instead.
inline Eigen::MatrixXd gradient_matrix(const Eigen::MatrixXd& M, const OperatorSpec& spec,
                                       bool normalized = false) {
    const SpectralData sd = SpectralData::analyze(M);
    const Eigen::VectorXd e = detail::admissible_sigmas(sd.eigenvalues, spec, "gradient");
    const Spectrum eta = transformed_spectrum(sd.eigenvalues, spec);

    Eigen::VectorXd g = detail::quotient_eta_gradient(eta, spec.k, spec.l);
    for (const auto& cluster : sd.clusters) {
        if (cluster.size() < 2) continue;
        double mean = 0.0;
        for (int i : cluster) mean += g[i];
        mean /= double(cluster.size());
        for (int i : cluster) g[i] = mean;
    }

    const int n = spec.n;
    Eigen::MatrixXd G = spec.gamma * g.sum() * Eigen::MatrixXd::Identity(n, n) +
                        double(spec.sign) * (sd.frame * g.asDiagonal() * sd.frame.transpose());
    G = ((G + G.transpose()) / 2.0).eval();  // restore exact symmetry

    if (normalized) {
        const double F = e[spec.k] / e[spec.l];
        const double p = 1.0 / double(spec.degree());
        G *= p * std::pow(F, p - 1.0);
    }
    return G;
}

// ---------------------------------------------------------------------------
// Structure probes used by the verification suites.
// ---------------------------------------------------------------------------

/// Finite-difference curvature probe along a direction in spectrum space.
struct ConcavityProbe {
    double value = 0.0;             // normalized operator value at lam
    double second_derivative = 0.0; // d^2/dt^2 of the normalized value, extrapolated
    double second_derivative_noise = 0.0;  // rounding-noise bound on the above
    double quotient_residual = 0.0; // (1 - 1/(k-l)) F'^2 / F  -  F''  (unnormalized)
    double residual_scale = 1.0;    // magnitude of the terms the residual subtracts
    double residual_noise = 0.0;    // rounding-noise bound on the residual
    double step = 0.0;              // step actually used after cone shrinking
};

/// Central second differences of t -> value(lam + t xi) at t = 0, Richardson
/// extrapolated, with the step shrunk until every sample point stays
/// admissible.  Throws ConeViolation if no usable step exists.
inline ConcavityProbe concavity_probe(const Spectrum& lam, const Spectrum& xi,
                                      const OperatorSpec& spec, double rel_step = 2e-3) {
    detail::require_spectrum(xi);
    if (xi.size() != lam.size())
        throw std::invalid_argument("probe direction dimension mismatch");
    if (!(rel_step > 0.0))
        throw std::invalid_argument("probe step must be positive");

    const double xin = xi.norm();
    if (xin == 0.0) throw std::invalid_argument("probe direction must be nonzero");
    double t = rel_step * std::max(lam.norm(), 1.0) / xin;

    const auto admissible = [&](const Spectrum& p) {
        return in_admissible_cone(p, spec).member;
    };

    bool usable = false;
    for (int shrink = 0; shrink < 40; ++shrink) {
        if (admissible((lam + t * xi).eval()) && admissible((lam - t * xi).eval()) &&
            admissible((lam + 0.5 * t * xi).eval()) && admissible((lam - 0.5 * t * xi).eval())) {
            usable = true;
            break;
        }
        t /= 2.0;
    }
    if (!usable)
        throw ConeViolation("concavity_probe: direction exits the admissible cone at every step",
                            in_admissible_cone(lam, spec).margins);

    ConcavityProbe out;
    out.step = t;

    const auto ftil = [&](const Spectrum& p) { return normalized_from_spectrum(p, spec); };
    const auto fraw = [&](const Spectrum& p) { return quotient_from_spectrum(p, spec); };

    const double f0 = ftil(lam);
    const double fp = ftil((lam + t * xi).eval()), fm = ftil((lam - t * xi).eval());
    const double hp = ftil((lam + 0.5 * t * xi).eval()), hm = ftil((lam - 0.5 * t * xi).eval());
    const double d2_full = (fp - 2.0 * f0 + fm) / (t * t);
    const double d2_half = (hp - 2.0 * f0 + hm) / (0.25 * t * t);
    out.value = f0;
    out.second_derivative = (4.0 * d2_half - d2_full) / 3.0;
    // Conservative bound on the rounding error of the extrapolated second
    // difference: a handful of ulps of the sampled values, divided by t^2.
    const double amp_til =
        std::max({std::abs(f0), std::abs(fp), std::abs(fm), std::abs(hp), std::abs(hm)});
    out.second_derivative_noise =
        64.0 * std::numeric_limits<double>::epsilon() * amp_til / (t * t);

    const double q0 = fraw(lam);
    const double qp = fraw((lam + t * xi).eval()), qm = fraw((lam - t * xi).eval());
    const double qhp = fraw((lam + 0.5 * t * xi).eval()), qhm = fraw((lam - 0.5 * t * xi).eval());
    const double qd1 = (qhp - qhm) / t;  // central with step t/2
    const double qd2_full = (qp - 2.0 * q0 + qm) / (t * t);
    const double qd2_half = (qhp - 2.0 * q0 + qhm) / (0.25 * t * t);
    const double qd2 = (4.0 * qd2_half - qd2_full) / 3.0;
    const double lead = (1.0 - 1.0 / double(spec.degree())) * qd1 * qd1 / q0;
    out.quotient_residual = lead - qd2;
    out.residual_scale = 1.0 + std::abs(lead) + std::abs(qd2);
    const double amp_q =
        std::max({std::abs(q0), std::abs(qp), std::abs(qm), std::abs(qhp), std::abs(qhm)});
    out.residual_noise =
        64.0 * std::numeric_limits<double>::epsilon() * amp_q / (t * t);
    return out;
}

/// First-derivative structure of the operator at one admissible spectrum,
/// sorted descending.  All quantities refer to the unnormalized quotient F.
struct EllipticityReport {
    Eigen::VectorXd dF_dlambda;   // derivative in the eigenvalues
    Eigen::VectorXd dF_deta;      // derivative in the transformed spectrum
    Eigen::VectorXd eta;          // the transformed spectrum itself

    bool lambda_monotone = false;   // dF/dlambda_i nondecreasing in i
    bool eta_monotone = false;      // dF/deta_i nonincreasing in i, verbatim order
    bool eta_antimonotone = false;  // (eta_i - eta_j)(g_i - g_j) <= 0 for all pairs

    double value = 0.0;           // F
    double min_dlambda = 0.0;
    double sum_dlambda = 0.0;
    double min_over_sum = 0.0;    // min_i dF/dlambda_i / sum_j dF/dlambda_j
    double sum_over_value_pow = 0.0;  // sum_j dF/dlambda_j / F^(1 - 1/(k-l))
};

inline EllipticityReport ellipticity_report(const Spectrum& lam, const OperatorSpec& spec,
                                            double rel_slack = 1e-12) {
    for (int i = 0; i + 1 < lam.size(); ++i)
        if (lam[i] < lam[i + 1])
            throw std::invalid_argument("ellipticity_report requires a spectrum sorted descending");
    const Eigen::VectorXd e = detail::admissible_sigmas(lam, spec, "ellipticity_report");

    EllipticityReport rep;
    rep.eta = transformed_spectrum(lam, spec);
    rep.dF_deta = detail::quotient_eta_gradient(rep.eta, spec.k, spec.l);
    rep.dF_dlambda =
        (spec.gamma * rep.dF_deta.sum() + double(spec.sign) * rep.dF_deta.array()).matrix();
    rep.value = e[spec.k] / e[spec.l];

    const int n = spec.n;
    const auto le = [&](double a, double b) {
        return a <= b + rel_slack * (std::abs(a) + std::abs(b) + 1.0);
    };

    rep.lambda_monotone = true;
    for (int i = 0; i + 1 < n; ++i)
        if (!le(rep.dF_dlambda[i], rep.dF_dlambda[i + 1])) rep.lambda_monotone = false;

    rep.eta_monotone = true;
    for (int i = 0; i + 1 < n; ++i)
        if (!le(rep.dF_deta[i + 1], rep.dF_deta[i])) rep.eta_monotone = false;

    rep.eta_antimonotone = true;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double cross = (rep.eta[i] - rep.eta[j]) * (rep.dF_deta[i] - rep.dF_deta[j]);
            if (cross > rel_slack * (rep.eta.cwiseAbs().maxCoeff() + 1.0) *
                            (rep.dF_deta.cwiseAbs().maxCoeff() + 1.0))
                rep.eta_antimonotone = false;
        }

    rep.min_dlambda = rep.dF_dlambda.minCoeff();
    rep.sum_dlambda = rep.dF_dlambda.sum();
    rep.min_over_sum = rep.min_dlambda / rep.sum_dlambda;
    rep.sum_over_value_pow =
        rep.sum_dlambda / std::pow(rep.value, 1.0 - 1.0 / double(spec.degree()));
    return rep;
}

}  // namespace hessquot
