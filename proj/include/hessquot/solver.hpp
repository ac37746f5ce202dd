#pragma once

// Damped Newton solver for the discrete system, with a line search that only
// accepts iterates that stay admissible (with a configurable cone margin) and
// strictly decrease the combined residual.  Degenerate right-hand sides are
// handled by an additive regularization sweep on the normalized datum
// (ftil -> ftil + eps), warm-starting each stage from the previous one.

#include <hessquot/discrete_system.hpp>
#include <hessquot/linear_reduction.hpp>

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hessquot {

struct SolverConfig {
    double tol_r = 1e-10;       // interior residual tolerance (sup-norm)
    double tol_b = 1e-10;       // boundary residual tolerance (sup-norm)
    int max_iterations = 50;    // Newton iteration budget
    double shrink = 0.5;        // line-search step shrink factor
    int max_halvings = 30;      // line-search budget
    double eps0 = 1e-2;         // first regularization stage
    double eps_shrink = 0.1;    // per-stage multiplier
    double eps_final = 1e-6;    // last stage (inclusive within rounding)
    double m_adm = 0.0;         // required min_i sigma_i(eta) at accepted iterates
    bool relative_margin = false;  // additionally require a scale-free margin >= 1e-10

    friend bool operator==(const SolverConfig&, const SolverConfig&) = default;

    void validate() const {
        if (!(tol_r > 0.0) || !(tol_b > 0.0))
            throw std::invalid_argument("solver tolerances must be positive");
        if (max_iterations < 1) throw std::invalid_argument("iteration budget must be >= 1");
        if (!(shrink > 0.0) || !(shrink < 1.0))
            throw std::invalid_argument("line-search shrink factor must lie in (0,1)");
        if (max_halvings < 0) throw std::invalid_argument("max halvings must be >= 0");
        if (!(eps0 > 0.0) || !(eps_shrink > 0.0) || !(eps_shrink < 1.0) || !(eps_final > 0.0) ||
            eps_final > eps0)
            throw std::invalid_argument(
                "regularization schedule must be positive and strictly decreasing");
        if (m_adm < 0.0) throw std::invalid_argument("admissibility margin must be >= 0");
    }

    /// eps0, eps0*shrink, ... down to eps_final (within a 1.01 rounding slack).
    std::vector<double> eps_schedule() const {
        validate();
        std::vector<double> s;
        for (double e = eps0; e >= eps_final * 0.99; e *= eps_shrink) {
            s.push_back(e);
            if (s.size() > 64) throw std::invalid_argument("regularization schedule too long");
        }
        return s;
    }
};

enum class SolveStatus {
    Converged,
    LineSearchFailure,
    LinearSolveFailure,
    IterationBudget,
    Stagnation
};

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::LineSearchFailure: return "line_search_failure";
        case SolveStatus::LinearSolveFailure: return "linear_solve_failure";
        case SolveStatus::IterationBudget: return "iteration_budget";
        case SolveStatus::Stagnation: return "stagnation";
    }
    return "unknown";
}

struct SolveReport {
    SolveStatus status = SolveStatus::IterationBudget;
    bool converged = false;
    int iterations = 0;
    std::vector<double> residual_history;  // combined sup-norm, initial iterate first
    std::vector<double> step_lengths;      // accepted line-search lengths
    std::vector<double> margin_history;    // min_i sigma_i(eta) per accepted iterate
    double interior_residual = 0.0;        // final sups
    double boundary_residual = 0.0;
    double sup_u = 0.0;
    double sup_du = 0.0;
    double sup_d2u = 0.0;      // max over nodes of the max-abs Hessian entry
    double min_margin = 0.0;   // min over nodes of min_i sigma_i(eta), final iterate
    double epsilon = 0.0;      // regularization added to ftil for this solve (0 = none)
    std::string message;
};

namespace detail {

inline void fill_field_norms(const ScalarField& u, SolveReport& rep) {
    const GridDomain& g = *u.domain;
    rep.sup_u = u.values.cwiseAbs().maxCoeff();
    rep.sup_du = 0.0;
    rep.sup_d2u = 0.0;
    for (long f = 0; f < g.node_count(); ++f) {
        rep.sup_du = std::max(rep.sup_du, gradient_at_node(u, f).cwiseAbs().maxCoeff());
        rep.sup_d2u = std::max(rep.sup_d2u, hessian_at_node(u, f).cwiseAbs().maxCoeff());
    }
}

inline bool margin_ok(const SystemEvaluation& ev, const SolverConfig& cfg) {
    if (!ev.admissible) return false;
    if (ev.min_raw_margin < cfg.m_adm) return false;
    if (cfg.relative_margin && ev.min_cone_margin < 1e-10) return false;
    return true;
}

}  // namespace detail

struct StepResult {
    bool accepted = false;
    double alpha = 0.0;
    ScalarField iterate;
    SystemEvaluation evaluation;
    bool stagnation = false;
};

/// Backtracking line search: the largest shrink^j that keeps every interior
/// node admissible (margin >= m_adm) and strictly decreases the combined
/// residual sup-norm.  A zero correction is accepted at full length and
/// flagged as stagnation.
inline StepResult damped_step(const ScalarField& u, const Eigen::VectorXd& delta,
                              const ProblemSpec& p, const SolverConfig& cfg,
                              const SystemEvaluation& current) {
    StepResult out;
    const double current_res = current.sup();
    if (delta.cwiseAbs().maxCoeff() == 0.0) {
        out.accepted = true;
        out.alpha = 1.0;
        out.iterate = u;
        out.evaluation = current;
        out.stagnation = true;
        return out;
    }
    double alpha = 1.0;
    for (int j = 0; j <= cfg.max_halvings; ++j, alpha *= cfg.shrink) {
        Eigen::VectorXd vals = u.values + alpha * delta;
        if (!vals.allFinite()) continue;
        ScalarField trial(u.domain, std::move(vals));
        SystemEvaluation ev = evaluate_system(trial, p, /*throw_on_violation=*/false);
        if (!detail::margin_ok(ev, cfg)) continue;
        if (!(ev.sup() < current_res)) continue;
        out.accepted = true;
        out.alpha = alpha;
        out.iterate = std::move(trial);
        out.evaluation = std::move(ev);
        out.stagnation = (current_res - out.evaluation.sup()) < 1e-14;
        return out;
    }
    return out;
}

/// Damped Newton iteration on the full nodal system.
inline std::pair<ScalarField, SolveReport> newton_solve(const ProblemSpec& p,
                                                        const ScalarField& u0,
                                                        const SolverConfig& cfg) {
    cfg.validate();
    if (!u0.domain || u0.domain.get() != p.domain.get())
        throw std::invalid_argument("initial iterate lives on a different grid");

    ScalarField u = u0;
    SystemEvaluation ev = evaluate_system(u, p, /*throw_on_violation=*/false);
    if (!ev.admissible)
        throw NodeAdmissibilityError(ev.violating_node, p.domain->coords(ev.violating_node),
                                     ev.violation_margins);
    if (!detail::margin_ok(ev, cfg))
        throw std::invalid_argument(
            "initial iterate is admissible but below the configured cone margin");

    SolveReport rep;
    rep.residual_history.push_back(ev.sup());
    rep.margin_history.push_back(ev.min_raw_margin);

    const auto finalize = [&](SolveStatus status, std::string msg) {
        rep.status = status;
        rep.converged = (status == SolveStatus::Converged);
        rep.message = std::move(msg);
        rep.interior_residual = ev.interior_sup;
        rep.boundary_residual = ev.boundary_sup;
        rep.min_margin = ev.min_raw_margin;
        detail::fill_field_norms(u, rep);
        return std::make_pair(u, rep);
    };

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        if (ev.interior_sup <= cfg.tol_r && ev.boundary_sup <= cfg.tol_b)
            return finalize(SolveStatus::Converged, "residuals under tolerance");

        LinearizedSystem sys = assemble_linearization(u, p);
        Eigen::SparseMatrix<double> A = sys.matrix;
        A.makeCompressed();
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
        if (lu.info() != Eigen::Success)
            return finalize(SolveStatus::LinearSolveFailure,
                            "sparse factorization failed (min row sup " +
                                std::to_string(sys.min_row_sup) + ")");
        const Eigen::VectorXd delta = lu.solve(sys.rhs);
        if (lu.info() != Eigen::Success || !delta.allFinite())
            return finalize(SolveStatus::LinearSolveFailure, "sparse back-substitution failed");

        StepResult step = damped_step(u, delta, p, cfg, ev);
        if (!step.accepted)
            return finalize(SolveStatus::LineSearchFailure,
                            "no admissible decreasing step within the halving budget");
        u = std::move(step.iterate);
        ev = std::move(step.evaluation);
        rep.iterations = iter + 1;
        rep.residual_history.push_back(ev.sup());
        rep.step_lengths.push_back(step.alpha);
        rep.margin_history.push_back(ev.min_raw_margin);
        if (step.stagnation) {
            if (ev.interior_sup <= cfg.tol_r && ev.boundary_sup <= cfg.tol_b)
                return finalize(SolveStatus::Converged, "residuals under tolerance");
            return finalize(SolveStatus::Stagnation,
                            "residual decrease below 1e-14 before reaching tolerance");
        }
    }
    if (ev.interior_sup <= cfg.tol_r && ev.boundary_sup <= cfg.tol_b)
        return finalize(SolveStatus::Converged, "residuals under tolerance");
    return finalize(SolveStatus::IterationBudget, "iteration budget exhausted");
}

/// Replace ftil by ftil + eps (the z-derivative is unchanged).
inline ProblemSpec regularized_problem(const ProblemSpec& p, double eps) {
    InteriorDatum f = p.f;
    return ProblemSpec(
        p.domain, p.op,
        [f, eps](const Eigen::Vector3d& x, double z) { return f(x, z) + eps; }, p.f_z, p.phi,
        p.phi_z, p.gamma0, p.subsolution);
}

/// Admissible starting iterate: the supplied subsolution when present,
/// otherwise the quadratic ansatz a|x - x_c|^2/2 + b with the curvature a
/// sized from the datum by homogeneity and the constant b shifted so the
/// boundary residual starts on the subsolution side (>= 0).
inline ScalarField initial_guess(const ProblemSpec& p, double headroom = 1e-2) {
    if (p.subsolution) return *p.subsolution;
    const GridDomain& g = *p.domain;
    const double unit = normalized_from_spectrum(Eigen::VectorXd::Ones(p.op.n), p.op);

    Eigen::Vector3d xc = Eigen::Vector3d::Zero();
    for (long f = 0; f < g.node_count(); ++f) xc += g.coords(f);
    xc /= double(g.node_count());

    const auto quadratic = [&](double a, double b) {
        return sample(p.domain, [&, a, b](const Eigen::Vector3d& x) {
            return 0.5 * a * (x - xc).squaredNorm() + b;
        });
    };

    double fmax = 0.0;
    for (long f = 0; f < g.node_count(); ++f)
        fmax = std::max(fmax, p.f(g.coords(f), 0.0));
    double a = (fmax == 0.0) ? 1.0 : (fmax + headroom) / unit;
    // Self-consistency rounds for z-dependent data (ftil_z >= 0 pushes up).
    for (int round = 0; round < 5 && fmax > 0.0; ++round) {
        ScalarField u0 = quadratic(a, 0.0);
        double fm = 0.0;
        for (long f = 0; f < g.node_count(); ++f)
            fm = std::max(fm, p.f(g.coords(f), u0.values[f]));
        const double a_next = (fm + headroom) / unit;
        if (a_next <= a * (1.0 + 1e-12)) break;
        a = a_next;
    }

    ScalarField u0 = quadratic(a, 0.0);
    double deficit = 0.0;  // most negative boundary residual at b = 0
    for (const long node : g.boundary_nodes()) {
        const auto& bn = g.boundary_info(node);
        const double r = bn.beta_mean.dot(gradient_at_node(u0, node)) -
                         p.phi_mean(bn, u0.values[node]);
        deficit = std::min(deficit, r);
    }
    const double b = deficit / p.gamma0;  // <= 0; phi_z >= gamma0 makes this enough
    return quadratic(a, b);
}

struct SweepResult {
    ScalarField solution;                 // final-stage iterate (converged or not)
    std::vector<SolveReport> stages;      // one per epsilon, schedule order
    std::vector<double> epsilons;
    bool all_converged = false;
};

/// Solve a decreasing sequence of regularized problems, warm-starting each
/// stage from the previous solution.  Any stage failure aborts the sweep,
/// returning the reports accumulated so far.
inline SweepResult regularized_sweep(const ProblemSpec& p, const SolverConfig& cfg) {
    const std::vector<double> schedule = cfg.eps_schedule();
    SweepResult out;
    ScalarField u = initial_guess(p, cfg.eps0);
    out.solution = u;
    for (const double eps : schedule) {
        const ProblemSpec pe = regularized_problem(p, eps);
        auto [ue, rep] = newton_solve(pe, u, cfg);
        rep.epsilon = eps;
        out.stages.push_back(rep);
        out.epsilons.push_back(eps);
        out.solution = ue;
        if (!rep.converged) {
            out.all_converged = false;
            return out;
        }
        u = std::move(ue);
    }
    out.all_converged = !out.stages.empty();
    return out;
}

struct SubsolutionReport {
    bool passed = false;          // interior >= -tol_r and boundary >= -tol_b
    bool boundary_equality = false;  // sup |boundary residual| <= tol_b
    double interior_min = 0.0;    // min over interior nodes of Ftil - ftil
    double boundary_min = 0.0;    // min over boundary nodes of beta.Du - phi
    double boundary_sup_abs = 0.0;
};

/// One-sided subsolution test: the interior value may not fall below the
/// datum and the boundary residual may not fall below zero (both within
/// tolerance).  `boundary_equality` additionally records whether the boundary
/// condition holds with equality, which an exact solution satisfies.
inline SubsolutionReport subsolution_check(const ScalarField& ubar, const ProblemSpec& p,
                                           double tol_r = 1e-10, double tol_b = 1e-10) {
    const SystemEvaluation ev = evaluate_system(ubar, p);  // throws if inadmissible
    SubsolutionReport rep;
    rep.interior_min = std::numeric_limits<double>::infinity();
    rep.boundary_min = std::numeric_limits<double>::infinity();
    for (const long node : p.domain->interior_nodes())
        rep.interior_min = std::min(rep.interior_min, ev.residual[node]);
    for (const long node : p.domain->boundary_nodes()) {
        rep.boundary_min = std::min(rep.boundary_min, ev.residual[node]);
        rep.boundary_sup_abs = std::max(rep.boundary_sup_abs, std::abs(ev.residual[node]));
    }
    if (p.domain->interior_nodes().empty()) rep.interior_min = 0.0;
    rep.passed = rep.interior_min >= -tol_r && rep.boundary_min >= -tol_b;
    rep.boundary_equality = rep.boundary_sup_abs <= tol_b;
    return rep;
}

struct ComparisonReport {
    bool preconditions_ok = false;  // monotone data at the compared iterates
    bool subsolution_ok = false;
    bool comparison_ok = false;     // u >= ubar - tol everywhere
    bool boundary_max_ok = false;   // u(x0) <= -phi(x0, 0)/gamma0 + tol at the boundary max
    bool passed = false;
    double min_gap = 0.0;           // min(u - ubar)
    double max_u = 0.0;
    double bound_value = 0.0;       // -phi(x0,0)/gamma0 + tol, when applicable
    long max_node = -1;
};

/// Discrete comparison structure: a converged solution dominates any
/// subsolution, and a positive maximum is capped through the boundary datum.
inline ComparisonReport comparison_check(const ScalarField& u, const ScalarField& ubar,
                                         const ProblemSpec& p, double tol = 1e-6,
                                         double tol_r = 1e-10, double tol_b = 1e-10) {
    ComparisonReport rep;
    const GridDomain& g = *p.domain;

    rep.preconditions_ok = true;
    for (long f = 0; f < g.node_count() && rep.preconditions_ok; ++f) {
        const Eigen::Vector3d x = g.coords(f);
        for (const double z : {u.values[f], ubar.values[f]})
            if (p.f_z(x, z) < -1e-12) rep.preconditions_ok = false;
    }
    for (const long node : g.boundary_nodes()) {
        const auto& bn = g.boundary_info(node);
        for (const double z : {u.values[node], ubar.values[node]})
            if (p.phi_z_mean(bn, z) < p.gamma0 - 1e-12) rep.preconditions_ok = false;
    }

    rep.subsolution_ok = subsolution_check(ubar, p, tol_r, tol_b).passed;

    rep.min_gap = (u.values - ubar.values).minCoeff();
    rep.comparison_ok = rep.min_gap >= -tol;

    rep.max_u = u.values.maxCoeff();
    Eigen::Index argmax = 0;
    u.values.maxCoeff(&argmax);
    rep.max_node = long(argmax);
    if (rep.max_u <= 0.0) {
        rep.boundary_max_ok = true;
    } else if (!g.is_interior(argmax)) {
        const auto& bn = g.boundary_info(argmax);
        rep.bound_value = -p.phi_mean(bn, 0.0) / p.gamma0 + tol;
        rep.boundary_max_ok = rep.max_u <= rep.bound_value;
    } else {
        rep.boundary_max_ok = false;  // positive max away from the boundary
    }

    rep.passed = rep.preconditions_ok && rep.subsolution_ok && rep.comparison_ok &&
                 rep.boundary_max_ok;
    return rep;
}

}  // namespace hessquot
