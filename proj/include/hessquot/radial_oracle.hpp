#pragma once

// Radially symmetric reference solver on the ball.  For u = u(r) the Hessian
// spectrum is (u''(r), u'(r)/r, ..., u'(r)/r), so the interior equation
// collapses to a scalar relation between u'' and u'/r at each radius:
//     Ftil(u'', u'/r, ..., u'/r) = ftil(r).
// Ftil is strictly increasing in u'' on the admissible set (ellipticity), so
// u'' is recovered by bisection and the profile integrates outward with RK4.
// The boundary condition u'(R) = phi(R, u(R)) pins the additive constant via
// monotonicity of phi in z.  Smooth domain, normal direction field: this is
// the cross-check for the box-domain machinery, not a clone of it.

#include <hessquot/quotient_operator.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace hessquot {

struct RadialProblem {
    OperatorSpec op;                                  // op.n is the ball dimension
    std::function<double(double)> ftil;               // r -> normalized datum >= 0
    std::function<double(double, double)> phi;        // (r, z), used at r = R
    std::function<double(double, double)> phi_z;      // its z-derivative, >= gamma0
    double gamma0 = 0.0;
    double radius = 1.0;

    explicit RadialProblem(OperatorSpec op_) : op(op_) {}
};

struct RadialProfile {
    Eigen::VectorXd r;      // samples in (0, R], ascending
    Eigen::VectorXd u;      // profile values
    Eigen::VectorXd du;     // profile derivative, du[i] = u'(r[i])
    Eigen::VectorXd d2u;    // curvature recovered from the scalar relation
    int n = 0;              // ball dimension
    double max_ode_residual = 0.0;  // max |Ftil(spectrum(r)) - ftil(r)| over samples

    /// Cubic Hermite interpolation of u (series extension below the first
    /// sample, where u is quadratic to leading order).
    double interpolate(double rr) const {
        if (rr <= r[0]) {
            const double u0 = u[0] - 0.5 * d2u[0] * r[0] * r[0];
            return u0 + 0.5 * d2u[0] * rr * rr;
        }
        const long i = locate(rr);
        return hermite(rr, r[i], r[i + 1], u[i], u[i + 1], du[i], du[i + 1]);
    }

    /// Same for u' (Hermite on du with slope d2u).
    double interpolate_du(double rr) const {
        if (rr <= r[0]) return d2u[0] * rr;
        const long i = locate(rr);
        return hermite(rr, r[i], r[i + 1], du[i], du[i + 1], d2u[i], d2u[i + 1]);
    }

private:
    long locate(double rr) const {
        long lo = 0, hi = r.size() - 1;
        while (hi - lo > 1) {
            const long mid = (lo + hi) / 2;
            (r[mid] <= rr) ? lo = mid : hi = mid;
        }
        return lo;
    }
    static double hermite(double x, double x0, double x1, double y0, double y1, double s0,
                          double s1) {
        const double w = x1 - x0, t = (x - x0) / w;
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * w * s0 +
               (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * w * s1;
    }
};

namespace detail {

/// Normalized operator value on the radial spectrum (curv, q, ..., q), or
/// nothing when outside the admissible cone.  The degenerate cone boundary
/// (all margins ~ 0 at spectrum ~ 0) evaluates to 0, the continuous limit.
inline std::optional<double> radial_value(double curv, double q, const OperatorSpec& spec) {
    Spectrum lam(spec.n);
    lam[0] = curv;
    lam.tail(spec.n - 1).setConstant(q);
    const Spectrum eta = transformed_spectrum(lam, spec);
    const Eigen::VectorXd e = elementary_symmetric_all(eta, spec.k);
    bool member = true;
    for (int i = 1; i <= spec.k; ++i) member = member && e[i] > 0.0;
    if (member) return std::pow(e[spec.k] / e[spec.l], 1.0 / double(spec.degree()));
    const double scale = 1.0 + eta.cwiseAbs().maxCoeff();
    if (e.segment(1, spec.k).cwiseAbs().maxCoeff() <= 1e-13 * std::pow(scale, spec.k))
        return 0.0;  // strict boundary of the cone
    return std::nullopt;
}

/// Recover u'' from Ftil(u'', q, ..., q) = target by bisection: membership
/// and value are both monotone in u'', so the predicate has a single edge.
inline double radial_curvature(double q, double target, const OperatorSpec& spec) {
    if (!(target >= 0.0) || !std::isfinite(target))
        throw std::domain_error("radial datum must be finite and nonnegative");
    const auto ok = [&](double t) {
        const auto v = radial_value(t, q, spec);
        return v.has_value() && *v >= target;
    };
    double hi = std::max(std::abs(q) * 2.0, 1.0);
    for (int i = 0; i < 400 && !ok(hi); ++i) hi = hi * 2.0 + 1.0;
    if (!ok(hi)) throw std::runtime_error("radial curvature: no admissible upper bracket");
    double lo = hi, step = std::max(1.0, std::abs(hi)) * 0.5;
    while (ok(lo)) {
        lo -= step;
        step *= 2.0;
        if (step > 1e300) throw std::runtime_error("radial curvature: no lower bracket");
    }
    for (int i = 0; i < 200 && (hi - lo) > 1e-16 * (1.0 + std::abs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace detail

/// Integrate the radial profile.  `steps` RK4 steps span [r_min, R] with
/// r_min = 1e-6 * R; the series start u'(r) ~ u''(0) * r seeds the
/// integration, with u''(0) from the homogeneity relation at the isotropic
/// spectrum.  The additive constant is pinned by u'(R) = phi(R, u(R)).
inline RadialProfile radial_solve(const RadialProblem& p, int steps = 4096) {
    if (!(p.radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
    if (!(p.gamma0 > 0.0)) throw std::invalid_argument("gamma0 must be positive");
    if (steps < 16) throw std::invalid_argument("need at least 16 integration steps");
    const OperatorSpec& op = p.op;
    const double R = p.radius;
    const double r_min = 1e-6 * R;

    RadialProfile out;
    out.n = op.n;
    out.r.resize(steps + 1);
    out.u.resize(steps + 1);
    out.du.resize(steps + 1);
    out.d2u.resize(steps + 1);

    // Degenerate special case: identically vanishing datum with l = 0 admits
    // the flat profile (sigma_k of the zero spectrum is 0).
    bool all_zero = (op.l == 0);
    if (all_zero) {
        for (int i = 0; i <= 16 && all_zero; ++i)
            all_zero = (p.ftil(R * double(i) / 16.0) == 0.0);
    }

    const double f0 = p.ftil(0.0);
    if (!(f0 >= 0.0) || !std::isfinite(f0))
        throw std::domain_error("radial datum must be finite and nonnegative");

    if (all_zero) {
        for (int i = 0; i <= steps; ++i)
            out.r[i] = r_min + (R - r_min) * double(i) / double(steps);
        out.u.setZero();
        out.du.setZero();
        out.d2u.setZero();
    } else {
        // u''(0) = ftil(0) / Ftil(isotropic unit spectrum), by homogeneity.
        const double unit = normalized_from_spectrum(Eigen::VectorXd::Ones(op.n), op);
        const double m = f0 / unit;

        const double dr = (R - r_min) / double(steps);
        double rr = r_min;
        double uu = 0.5 * m * r_min * r_min;  // series values; constant fixed later
        double w = m * r_min;
        const auto slope = [&](double rad, double wval) {
            return detail::radial_curvature(wval / rad, p.ftil(rad), op);
        };
        out.r[0] = rr;
        out.u[0] = uu;
        out.du[0] = w;
        out.d2u[0] = slope(rr, w);
        for (int i = 0; i < steps; ++i) {
            const double k1u = w, k1w = slope(rr, w);
            const double k2u = w + 0.5 * dr * k1w, k2w = slope(rr + 0.5 * dr, w + 0.5 * dr * k1w);
            const double k3u = w + 0.5 * dr * k2w, k3w = slope(rr + 0.5 * dr, w + 0.5 * dr * k2w);
            const double k4u = w + dr * k3w, k4w = slope(rr + dr, w + dr * k3w);
            uu += dr / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            w += dr / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
            rr = r_min + dr * double(i + 1);
            out.r[i + 1] = rr;
            out.u[i + 1] = uu;
            out.du[i + 1] = w;
            out.d2u[i + 1] = slope(rr, w);
        }
        if (!out.u.allFinite() || !out.du.allFinite())
            throw std::runtime_error("radial integration diverged");
    }

    // Pin the additive constant: phi(R, u(R)) = u'(R), monotone in u(R).
    const double wR = out.du[steps];
    const auto bc = [&](double c) { return p.phi(R, c) - wR; };
    double lo = 0.0, hi = 0.0, span = 1.0 + std::abs(wR);
    for (int i = 0; i < 200 && bc(lo) > 0.0; ++i) {
        lo -= span;
        span *= 2.0;
    }
    span = 1.0 + std::abs(wR);
    for (int i = 0; i < 200 && bc(hi) < 0.0; ++i) {
        hi += span;
        span *= 2.0;
    }
    if (bc(lo) > 0.0 || bc(hi) < 0.0)
        throw std::runtime_error("radial boundary pinning failed to bracket");
    for (int i = 0; i < 200 && (hi - lo) > 1e-15 * (1.0 + std::abs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        (bc(mid) <= 0.0 ? lo : hi) = mid;
    }
    const double target_uR = 0.5 * (lo + hi);
    out.u.array() += target_uR - out.u[steps];

    // Collocation residual of the returned profile, evaluated through the
    // operator layer (not the bisection shortcut).
    for (int i = 0; i <= steps; ++i) {
        const auto v = detail::radial_value(out.d2u[i], out.du[i] / out.r[i], op);
        if (!v.has_value()) throw std::runtime_error("radial profile left the admissible cone");
        out.max_ode_residual =
            std::max(out.max_ode_residual, std::abs(*v - p.ftil(out.r[i])));
    }
    return out;
}

}  // namespace hessquot
