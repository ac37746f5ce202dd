#pragma once

// Independent cross-checking routes: subset enumeration for the elementary
// symmetric functions and plain finite differences for matrix derivatives.
// These are deliberately written against the definitions, with none of the
// algebraic shortcuts the production code uses, so the two sides can only
// agree if both are right.

#include <hessquot/quotient_operator.hpp>
#include <hessquot/symmetric_functions.hpp>

#include <cstdint>
#include <stdexcept>

namespace hessquot::oracle {

/// Plain sum plus absolute-value sum of the same products.  The absolute sum
/// is the natural conditioning scale for comparisons: any correctly rounded
/// evaluation of sigma_k can only be trusted to eps * abs_sum.
struct EnumerationSums {
    double sum = 0.0;
    double abs_sum = 0.0;
};

/// sigma_k(lam) by literal enumeration of all k-element subsets.  Costs
/// C(n, k) products, so the dimension is capped at 12.  Total in k (returns
/// 1 / 0 outside the defined band) like the production evaluator.
inline EnumerationSums sigma_enumeration_sums(const Spectrum& lam, int k) {
    detail::require_spectrum(lam);
    const int n = int(lam.size());
    if (n > 12)
        throw std::invalid_argument(
            "sigma_enumeration is capped at dimension 12; got " + std::to_string(n));
    if (k < 0 || k > n) return {0.0, 0.0};
    if (k == 0) return {1.0, 1.0};

    EnumerationSums out;
    // March through bitmask subsets of fixed popcount k via Gosper's hack.
    const std::uint32_t limit = std::uint32_t(1) << n;
    std::uint32_t mask = (std::uint32_t(1) << k) - 1;
    while (mask < limit) {
        double prod = 1.0;
        for (int i = 0; i < n; ++i)
            if (mask & (std::uint32_t(1) << i)) prod *= lam[i];
        out.sum += prod;
        out.abs_sum += std::abs(prod);
        const std::uint32_t c = mask & (0u - mask);
        const std::uint32_t r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    return out;
}

/// Convenience wrapper returning just the signed sum.
inline double sigma_enumeration(const Spectrum& lam, int k) {
    return sigma_enumeration_sums(lam, k).sum;
}

/// Matrix derivative of the (optionally normalized) quotient operator by
/// entrywise central differences.  Each off-diagonal entry is perturbed
/// together with its mirror to stay symmetric, and the resulting slope is
/// halved so the convention matches <G, dM> = dF for symmetric dM.  The
/// default step is 1e-5 * (1 + max |M_ij|).
inline Eigen::MatrixXd fd_matrix_derivative(const Eigen::MatrixXd& M,
                                            const OperatorSpec& spec,
                                            bool normalized = false, double step = 0.0) {
    const int n = int(M.rows());
    if (M.cols() != n) throw std::invalid_argument("fd_matrix_derivative needs a square matrix");
    const double h = (step > 0.0) ? step : 1e-5 * (1.0 + M.cwiseAbs().maxCoeff());

    const auto eval = [&](const Eigen::MatrixXd& A) {
        return normalized ? normalized_value(A, spec) : quotient_value(A, spec);
    };

    Eigen::MatrixXd G(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            Eigen::MatrixXd P = M, Q = M;
            P(i, j) += h;
            Q(i, j) -= h;
            if (j != i) {
                P(j, i) += h;
                Q(j, i) -= h;
            }
            double d = (eval(P) - eval(Q)) / (2.0 * h);
            if (j != i) d /= 2.0;
            G(i, j) = G(j, i) = d;
        }
    }
    return G;
}

}  // namespace hessquot::oracle
