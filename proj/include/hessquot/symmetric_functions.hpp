#pragma once

// Elementary symmetric functions, Garding cones and Maclaurin-normalized
// quotient ratios on eigenvalue vectors.  Everything here is plain real
// algebra on a Spectrum (an Eigen vector of eigenvalues); no matrices yet.

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hessquot {

/// Eigenvalue vector. Entries are finite reals; dimension is at least 2.
using Spectrum = Eigen::VectorXd;

/// Thrown when an operation requires cone membership that the input violates.
/// Carries the sigma margins that were inspected, so callers can report how
/// far outside the cone the offending spectrum sits.
class ConeViolation : public std::domain_error {
public:
    ConeViolation(std::string what, Eigen::VectorXd margins_)
        : std::domain_error(std::move(what)), margins(std::move(margins_)) {}

    Eigen::VectorXd margins;  // sigma_1..sigma_k of the rejected spectrum
};

namespace detail {

inline void require_spectrum(const Spectrum& lam) {
    if (lam.size() < 1)
        throw std::invalid_argument("spectrum must not be empty");
    if (!lam.allFinite())
        throw std::invalid_argument("spectrum contains a non-finite entry");
}

inline void require_index(const Spectrum& lam, int i) {
    if (i < 0 || i >= lam.size())
        throw std::out_of_range("spectrum index " + std::to_string(i) +
                                " out of range for dimension " +
                                std::to_string(lam.size()));
}

}  // namespace detail

/// Binomial coefficient C(n, k) as a double. Zero outside 0 <= k <= n.
inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (int j = 1; j <= k; ++j) c *= double(n - k + j) / double(j);
    return c;
}

/// All elementary symmetric functions sigma_0..sigma_kmax of lam in one
/// sweep.  Uses the standard one-row update: after absorbing lam_i,
/// e_j <- e_j + lam_i * e_{j-1}, descending in j.  O(n * kmax).
inline Eigen::VectorXd elementary_symmetric_all(const Spectrum& lam, int kmax) {
    detail::require_spectrum(lam);
    const int n = int(lam.size());
    kmax = std::min(kmax, n);
    if (kmax < 0) throw std::invalid_argument("kmax must be nonnegative");
    Eigen::VectorXd e = Eigen::VectorXd::Zero(kmax + 1);
    e[0] = 1.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::min(kmax, i + 1); j >= 1; --j)
            e[j] += lam[i] * e[j - 1];
    return e;
}

/// sigma_k(lam). Total in k: returns 1 for k == 0 and 0 for k < 0 or k > n.
inline double elementary_symmetric(const Spectrum& lam, int k) {
    detail::require_spectrum(lam);
    if (k < 0 || k > lam.size()) return 0.0;
    if (k == 0) return 1.0;
    return elementary_symmetric_all(lam, k)[k];
}

/// sigma_{k-1}(lam | i): the (k-1)-th elementary symmetric function of lam
/// with the i-th entry deleted.  Equals d sigma_k / d lam_i.  i is zero-based.
inline double sigma_partial(const Spectrum& lam, int k, int i) {
    detail::require_spectrum(lam);
    detail::require_index(lam, i);
    const int n = int(lam.size());
    if (k < 1 || k > n)
        throw std::invalid_argument("sigma_partial requires 1 <= k <= n, got k=" +
                                    std::to_string(k));
    if (k == 1) return 1.0;  // sigma_0 of anything
    Spectrum reduced(n - 1);
    int w = 0;
    for (int j = 0; j < n; ++j)
        if (j != i) reduced[w++] = lam[j];
    return elementary_symmetric_all(reduced, k - 1)[k - 1];
}

/// Membership report for the cone Gamma_k = { lam : sigma_1..sigma_k > 0 }.
struct ConeReport {
    int k = 0;
    bool member = false;
    Eigen::VectorXd margins;  // sigma_1(lam)..sigma_k(lam), in that order

    double min_margin() const { return margins.size() ? margins.minCoeff() : 0.0; }
};

/// Test lam against Gamma_k.  Strict positivity of every sigma_1..sigma_k.
inline ConeReport in_gamma_k(const Spectrum& lam, int k) {
    detail::require_spectrum(lam);
    if (k < 1 || k > lam.size())
        throw std::invalid_argument("in_gamma_k requires 1 <= k <= n, got k=" +
                                    std::to_string(k));
    ConeReport rep;
    rep.k = k;
    Eigen::VectorXd e = elementary_symmetric_all(lam, k);
    rep.margins = e.segment(1, k);
    rep.member = (rep.margins.array() > 0.0).all();
    return rep;
}

namespace detail {

inline void require_gamma_k(const Spectrum& lam, int k, const char* who) {
    ConeReport rep = in_gamma_k(lam, k);
    if (!rep.member) {
        std::ostringstream os;
        os << who << ": spectrum is not in Gamma_" << k
           << " (min sigma margin " << rep.min_margin() << ")";
        throw ConeViolation(os.str(), rep.margins);
    }
}

}  // namespace detail

/// Maclaurin-normalized quotient ratio
///   [ (sigma_k / C(n,k)) / (sigma_l / C(n,l)) ]^(1/(k-l)),
/// defined for lam in Gamma_k and 0 <= l < k <= n.
inline double maclaurin_ratio(const Spectrum& lam, int k, int l) {
    detail::require_spectrum(lam);
    const int n = int(lam.size());
    if (!(0 <= l && l < k && k <= n))
        throw std::invalid_argument("maclaurin_ratio requires 0 <= l < k <= n, got k=" +
                                    std::to_string(k) + " l=" + std::to_string(l));
    detail::require_gamma_k(lam, k, "maclaurin_ratio");
    Eigen::VectorXd e = elementary_symmetric_all(lam, k);
    const double num = e[k] / binomial(n, k);
    const double den = e[l] / binomial(n, l);
    return std::pow(num / den, 1.0 / double(k - l));
}

/// Diagnostic record for the normalized-ratio comparison chain and the
/// deleted-entry structure of sigma_{k-1} on a sorted spectrum.
struct NewtonMaclaurinReport {
    struct ChainViolation {
        int k = 0, l = 0, r = 0, s = 0;
        double lhs = 0.0, rhs = 0.0;  // ratio(k,l) vs ratio(r,s)
    };

    bool chain_ok = false;
    std::vector<ChainViolation> violations;

    /// sigma_{k-1}(lam|i) nondecreasing in i for lam sorted descending.
    bool partial_monotone_ok = false;

    /// sigma_{k-1}(lam | k-th entry) measured against sigma_{k-1}(lam) and
    /// against the sum over i of sigma_{k-1}(lam | i).  Raw ratios only;
    /// no dimensional constant is attached to either bound.
    double pivot_ratio_to_total = 0.0;
    double pivot_ratio_to_partial_sum = 0.0;
};

/// Run the full comparison chain ratio(K,L) <= ratio(R,S) over every pair of
/// index pairs with K >= R > S, L >= S, K > L, K <= k, together with the
/// deleted-entry monotonicity flags.  lam must be sorted descending and lie
/// in Gamma_k.  rel_slack is the multiplicative slack granted to each
/// inequality before it is flagged.
inline NewtonMaclaurinReport newton_maclaurin_check(const Spectrum& lam, int k,
                                                    double rel_slack = 1e-12) {
    detail::require_spectrum(lam);
    const int n = int(lam.size());
    if (k < 1 || k > n)
        throw std::invalid_argument("newton_maclaurin_check requires 1 <= k <= n");
    for (int i = 0; i + 1 < n; ++i)
        if (lam[i] < lam[i + 1])
            throw std::invalid_argument(
                "newton_maclaurin_check requires a spectrum sorted descending");
    detail::require_gamma_k(lam, k, "newton_maclaurin_check");

    NewtonMaclaurinReport rep;

    // Cache ratio(K,L) for all 0 <= L < K <= k. Nested cones make every pair
    // with K <= k well defined.
    std::vector<std::vector<double>> ratio(k + 1);
    for (int K = 1; K <= k; ++K) {
        ratio[K].assign(K, 0.0);
        for (int L = 0; L < K; ++L) ratio[K][L] = maclaurin_ratio(lam, K, L);
    }

    rep.chain_ok = true;
    for (int K = 1; K <= k; ++K)
        for (int L = 0; L < K; ++L)
            for (int R = 1; R <= K; ++R)
                for (int S = 0; S < R && S <= L; ++S) {
                    const double lhs = ratio[K][L];
                    const double rhs = ratio[R][S];
                    if (lhs > rhs * (1.0 + rel_slack)) {
                        rep.chain_ok = false;
                        rep.violations.push_back({K, L, R, S, lhs, rhs});
                    }
                }

    rep.partial_monotone_ok = true;
    Eigen::VectorXd partials(n);
    for (int i = 0; i < n; ++i) partials[i] = sigma_partial(lam, k, i);
    for (int i = 0; i + 1 < n; ++i)
        if (partials[i] > partials[i + 1]) rep.partial_monotone_ok = false;

    const double pivot = partials[k - 1];  // entry index k-1 <-> the k-th largest
    rep.pivot_ratio_to_total = pivot / elementary_symmetric(lam, k - 1);
    rep.pivot_ratio_to_partial_sum = pivot / partials.sum();
    return rep;
}

}  // namespace hessquot
