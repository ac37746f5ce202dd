#pragma once

// Self-contained verification suites for the operator layer.  Each suite
// draws its own deterministic sample stream from a caller-supplied seed,
// checks one family of properties against an independent oracle or an
// algebraic identity, and reports the worst figure of merit it saw together
// with the tolerance it enforced.  The CLI `verify` subcommand and the
// acceptance gate both run these.

#include <hessquot/oracle.hpp>
#include <hessquot/quotient_operator.hpp>
#include <hessquot/sampling.hpp>
#include <hessquot/symmetric_functions.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace hessquot::verify {

struct SuiteResult {
    int index = 0;
    std::string name;
    bool passed = false;
    long samples = 0;   // individual checks performed
    double worst = 0.0; // worst normalized figure of merit observed
    double limit = 0.0; // the bound `worst` was held to
    double seconds = 0.0;
    std::string detail;
};

namespace detail_verify {

inline double elapsed(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// The shared 200-matrix sample used by the gradient-oracle and scaling
/// suites: spans n in {2,3,4}, both signs, gamma in {1,2}, every legal
/// (k,l) pair, with every tenth matrix given repeated eigenvalues.
struct MatrixSample {
    OperatorSpec spec;
    Eigen::MatrixXd M;
    bool repeated = false;
};

inline std::vector<MatrixSample> matrix_panel(std::uint64_t seed, int count = 200) {
    sampling::Rng rng(seed);
    std::vector<OperatorSpec> combos;
    for (int n : {2, 3, 4})
        for (int sign : {-1, 1})
            for (double gamma : {1.0, 2.0})
                for (const auto& [k, l] : sampling::legal_index_pairs(n, sign, gamma))
                    combos.emplace_back(n, k, l, gamma, sign);
    std::vector<MatrixSample> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        const OperatorSpec& spec = combos[i % combos.size()];
        const bool repeats = (i % 10) == 0;  // 20 of 200
        out.push_back({spec, sampling::admissible_matrix(rng, spec, 1e-2, repeats), repeats});
    }
    return out;
}

}  // namespace detail_verify

/// Suite 1: the production evaluator against literal subset enumeration on
/// 10^4 random spectra of dimension up to 8, every order k, relative error
/// measured against the enumeration's own conditioning scale.
inline SuiteResult suite_symmetric_oracle(std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    SuiteResult res{1, "symmetric-function oracle equivalence", false, 0, 0.0, 1e-12, 0.0, ""};
    sampling::Rng rng(seed);
    for (int s = 0; s < 10000; ++s) {
        const int n = 1 + int(rng() % 8);
        const Spectrum lam = sampling::uniform_spectrum(rng, n, -3.0, 3.0);
        const Eigen::VectorXd e = elementary_symmetric_all(lam, n);
        for (int k = 0; k <= n; ++k) {
            const auto sums = oracle::sigma_enumeration_sums(lam, k);
            const double denom = std::max(1.0, sums.abs_sum);
            res.worst = std::max(res.worst, std::abs(e[k] - sums.sum) / denom);
            ++res.samples;
        }
    }
    res.passed = res.worst <= res.limit;
    res.seconds = detail_verify::elapsed(t0);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%ld comparisons, worst relative error %.3e (limit %.0e)",
                  res.samples, res.worst, res.limit);
    res.detail = buf;
    return res;
}

/// Suite 2: the full monotone comparison chain between normalized ratios on
/// 10^5 rejection-sampled cone members across n in {3,4,5}, plus equality of
/// every ratio on all-equal spectra.
inline SuiteResult suite_maclaurin_chain(std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    SuiteResult res{2, "normalized-ratio comparison chain", false, 0, 0.0, 1e-12, 0.0, ""};
    sampling::Rng rng(seed + 1);
    long violations = 0;
    for (const int n : {3, 4, 5}) {
        for (int s = 0; s < 33400; ++s) {
            const int k = 1 + int(rng() % n);
            Spectrum lam = sampling::gamma_k_member(rng, n, k);
            std::sort(lam.data(), lam.data() + n, std::greater<double>());
            const auto rep = newton_maclaurin_check(lam, k, 1e-12);
            if (!rep.chain_ok) {
                violations += long(rep.violations.size());
                for (const auto& v : rep.violations)
                    res.worst = std::max(res.worst, (v.lhs - v.rhs) / std::abs(v.rhs));
            }
            ++res.samples;
        }
        // All-equal spectra: every normalized ratio collapses to the common
        // entry, so all pairs agree to rounding.
        for (const double c : {0.7, 1.0, 3.2}) {
            const Spectrum eq = Eigen::VectorXd::Constant(n, c);
            for (int K = 1; K <= n; ++K)
                for (int L = 0; L < K; ++L) {
                    const double r = maclaurin_ratio(eq, K, L);
                    res.worst = std::max(res.worst, std::abs(r - c) / c);
                    ++res.samples;
                }
        }
    }
    res.passed = violations == 0 && res.worst <= res.limit;
    res.seconds = detail_verify::elapsed(t0);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%ld checks, %ld chain violations, worst relative slack %.3e (limit %.0e)",
                  res.samples, violations, res.worst, res.limit);
    res.detail = buf;
    return res;
}

/// Suite 3: ellipticity structure on 10^4 random admissible spectra, both
/// signs, gamma in {1,2}: the eigenvalue-derivative ordering, the pairwise
/// anti-alignment of the transformed spectrum with its derivative, strict
/// positivity of the smallest derivative, and ray invariance of the
/// conditioning ratio.
inline SuiteResult suite_ellipticity_structure(std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    SuiteResult res{3, "ellipticity orderings and conditioning ratio", false, 0, 0.0, 1e-10,
                    0.0, ""};
    sampling::Rng rng(seed + 2);
    long failures = 0;
    for (int s = 0; s < 10000; ++s) {
        const int n = 2 + int(rng() % 4);
        const int sign = (rng() & 1u) ? 1 : -1;
        const double gamma = (rng() & 1u) ? 2.0 : 1.0;
        const auto pairs = sampling::legal_index_pairs(n, sign, gamma);
        const auto [k, l] = pairs[rng() % pairs.size()];
        const OperatorSpec spec(n, k, l, gamma, sign);
        Spectrum lam = sampling::admissible_spectrum(rng, spec, 1e-6);
        std::sort(lam.data(), lam.data() + n, std::greater<double>());
        const auto rep = ellipticity_report(lam, spec, 1e-12);
        bool ok = rep.lambda_monotone && rep.eta_antimonotone && rep.min_dlambda > 0.0 &&
                  rep.sum_over_value_pow > 0.0;
        if (sign == -1) ok = ok && rep.eta_monotone;
        const double t = (s % 2 == 0) ? 0.5 : 7.0;
        const auto scaled = ellipticity_report((t * lam).eval(), spec, 1e-12);
        const double ray_err = std::abs(scaled.sum_over_value_pow - rep.sum_over_value_pow) /
                               std::abs(rep.sum_over_value_pow);
        res.worst = std::max(res.worst, ray_err);
        if (!ok || ray_err > res.limit) ++failures;
        ++res.samples;
    }
    res.passed = failures == 0;
    res.seconds = detail_verify::elapsed(t0);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%ld spectra, %ld failures, worst ray-invariance error %.3e (limit %.0e)",
                  res.samples, failures, res.worst, res.limit);
    res.detail = buf;
    return res;
}

/// Suite 4: concavity of the normalized operator along 10^4 random spectrum
/// directions (second difference bounded by 1e-8 * (1 + |value|)), and exact
/// linearity of the k=1, l=0 pair to absolute 1e-8.
inline SuiteResult suite_concavity(std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    SuiteResult res{4, "concavity of the normalized operator", false, 0, 0.0, 1e-8, 0.0, ""};
    sampling::Rng rng(seed + 3);
    std::normal_distribution<double> gauss(0.0, 1.0);
    long failures = 0;
    for (int s = 0; s < 10000; ++s) {
        const int n = 2 + int(rng() % 4);
        const int sign = (rng() & 1u) ? 1 : -1;
        const double gamma = (rng() & 1u) ? 2.0 : 1.0;
        const auto pairs = sampling::legal_index_pairs(n, sign, gamma);
        const auto [k, l] = pairs[rng() % pairs.size()];
        const OperatorSpec spec(n, k, l, gamma, sign);
        const Spectrum lam = sampling::admissible_spectrum(rng, spec, 1e-2);
        Spectrum xi(n);
        for (int i = 0; i < n; ++i) xi[i] = gauss(rng);
        if (xi.norm() == 0.0) xi[0] = 1.0;
        xi *= lam.norm() / xi.norm();
        const auto probe = concavity_probe(lam, xi, spec);
        const double normalized = probe.second_derivative / (1.0 + std::abs(probe.value));
        res.worst = std::max(res.worst, normalized);
        if (normalized > res.limit) ++failures;
        ++res.samples;
    }
    // Linear pair: the normalized value is an affine function of the
    // spectrum, so the probe must return zero curvature outright.  A linear
    // function has no truncation error at any step, so a large probe step is
    // used to keep the difference quotient far above rounding noise.
    double worst_linear = 0.0;
    for (int s = 0; s < 1000; ++s) {
        const int n = 2 + int(rng() % 4);
        const int sign = (rng() & 1u) ? 1 : -1;
        const double gamma = (rng() & 1u) ? 2.0 : 1.0;
        const OperatorSpec spec(n, 1, 0, gamma, sign);
        const Spectrum lam = sampling::admissible_spectrum(rng, spec, 1e-2);
        Spectrum xi(n);
        for (int i = 0; i < n; ++i) xi[i] = gauss(rng);
        if (xi.norm() == 0.0) xi[0] = 1.0;
        xi *= lam.norm() / xi.norm();
        const auto probe = concavity_probe(lam, xi, spec, 0.5);
        worst_linear = std::max(worst_linear, std::abs(probe.second_derivative));
        if (std::abs(probe.second_derivative) > res.limit) ++failures;
        ++res.samples;
    }
    res.passed = failures == 0;
    res.seconds = detail_verify::elapsed(t0);
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "%ld probes, %ld failures, worst scaled curvature %.3e, worst linear |d2| %.3e "
                  "(limit %.0e)",
                  res.samples, failures, res.worst, worst_linear, res.limit);
    res.detail = buf;
    return res;
}

/// Suite 5: the closed-form matrix gradient against entrywise central
/// differences on the shared 200-matrix panel, including the repeated-
/// eigenvalue members, entrywise relative error at most 1e-6.
inline SuiteResult suite_gradient_oracle(std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    SuiteResult res{5, "matrix gradient vs finite differences", false, 0, 0.0, 1e-6, 0.0, ""};
    const auto panel = detail_verify::matrix_panel(seed + 4);
    long failures = 0;
    int repeated = 0;
    for (const auto& sample : panel) {
        repeated += sample.repeated ? 1 : 0;
        for (const bool normalized : {false, true}) {
            const Eigen::MatrixXd G = gradient_matrix(sample.M, sample.spec, normalized);
            const Eigen::MatrixXd Gfd =
                oracle::fd_matrix_derivative(sample.M, sample.spec, normalized);
            const double scale = std::max(Gfd.cwiseAbs().maxCoeff(), 1e-12);
            for (int i = 0; i < sample.spec.n; ++i)
                for (int j = 0; j < sample.spec.n; ++j) {
                    const double rel = std::abs(G(i, j) - Gfd(i, j)) /
                                       std::max(std::abs(Gfd(i, j)), 1e-3 * scale);
                    res.worst = std::max(res.worst, rel);
                    if (rel > res.limit) ++failures;
                    ++res.samples;
                }
        }
    }
    res.passed = failures == 0 && repeated >= 20;
    res.seconds = detail_verify::elapsed(t0);
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "%zu matrices (%d with repeated eigenvalues), %ld entries, worst relative "
                  "error %.3e (limit %.0e)",
                  panel.size(), repeated, res.samples, res.worst, res.limit);
    res.detail = buf;
    return res;
}

/// Suite 6: homogeneity of both operator forms under matrix scaling and the
/// degree-one Euler contraction, on the same 200-matrix panel as suite 5.
inline SuiteResult suite_scaling_identities(std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    SuiteResult res{6, "homogeneity and Euler contraction", false, 0, 0.0, 1e-10, 0.0, ""};
    const auto panel = detail_verify::matrix_panel(seed + 4);  // same stream as suite 5
    long failures = 0;
    for (const auto& sample : panel) {
        const double Ft = normalized_value(sample.M, sample.spec);
        const double F = quotient_value(sample.M, sample.spec);
        for (const double t : {0.5, 2.0, 3.7}) {
            const Eigen::MatrixXd tM = t * sample.M;
            const double a = std::abs(normalized_value(tM, sample.spec) - t * Ft) /
                             std::abs(t * Ft);
            const double b =
                std::abs(quotient_value(tM, sample.spec) -
                         std::pow(t, double(sample.spec.degree())) * F) /
                std::abs(std::pow(t, double(sample.spec.degree())) * F);
            res.worst = std::max({res.worst, a, b});
            if (a > res.limit || b > res.limit) ++failures;
            res.samples += 2;
        }
        const Eigen::MatrixXd G = gradient_matrix(sample.M, sample.spec, true);
        const double euler = std::abs((G.array() * sample.M.array()).sum() - Ft) / std::abs(Ft);
        res.worst = std::max(res.worst, euler);
        if (euler > res.limit) ++failures;
        ++res.samples;
    }
    res.passed = failures == 0;
    res.seconds = detail_verify::elapsed(t0);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%ld identities, %ld failures, worst relative error %.3e "
                                    "(limit %.0e)",
                  res.samples, failures, res.worst, res.limit);
    res.detail = buf;
    return res;
}

/// Run all six suites in order with sub-seeds derived from `seed`.
inline std::vector<SuiteResult> run_verification_suites(std::uint64_t seed = 20260817u) {
    return {suite_symmetric_oracle(seed),   suite_maclaurin_chain(seed),
            suite_ellipticity_structure(seed), suite_concavity(seed),
            suite_gradient_oracle(seed),    suite_scaling_identities(seed)};
}

inline std::string format_suite_line(const SuiteResult& r) {
    char buf[320];
    std::snprintf(buf, sizeof(buf), "suite %d %-45s %s  [%6.2fs] %s", r.index, r.name.c_str(),
                  r.passed ? "PASS" : "FAIL", r.seconds, r.detail.c_str());
    return buf;
}

}  // namespace hessquot::verify
