#pragma once

// Discrete residuals and their exact linearization.  Each grid node owns one
// equation: interior nodes carry the normalized curvature-quotient equation
//     Ftil(gamma*(trace D2u)*I + sign*D2u) - f(x, u) = 0,
// boundary nodes carry the oblique condition, face-averaged where several
// faces meet:
//     mean_beta . Du - mean_phi(x, u) = 0.
// The Jacobian rows follow by the chain rule through the same stencils, so
// the linearization is consistent with the residual to rounding error.

#include <hessquot/grid.hpp>
#include <hessquot/problem.hpp>
#include <hessquot/quotient_operator.hpp>
#include <hessquot/sampling.hpp>

#include <Eigen/Sparse>

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace hessquot {

/// Cone violation tied to a grid node: the transformed Hessian spectrum left
/// the admissible cone there, so the equation is undefined at this iterate.
class NodeAdmissibilityError : public ConeViolation {
public:
    long node;
    Eigen::Vector3d position;

    NodeAdmissibilityError(long node_, const Eigen::Vector3d& x, Eigen::VectorXd margins_)
        : ConeViolation("transformed Hessian spectrum left the admissible cone at node " +
                            std::to_string(node_) + " (x = [" + std::to_string(x[0]) + ", " +
                            std::to_string(x[1]) + ", " + std::to_string(x[2]) +
                            "]); cone margins attached",
                        std::move(margins_)),
          node(node_),
          position(x) {}
};

/// One full residual evaluation.  `residual` has one entry per grid node in
/// flat order (interior equation or boundary equation as appropriate).
struct SystemEvaluation {
    Eigen::VectorXd residual;
    double interior_sup = 0.0;
    double boundary_sup = 0.0;
    long interior_worst = -1;  // flat node index, -1 if no interior nodes
    long boundary_worst = -1;
    bool admissible = true;
    long violating_node = -1;
    Eigen::VectorXd violation_margins;
    /// min over interior nodes of the scale-free cone margin of eta.
    double min_cone_margin = std::numeric_limits<double>::infinity();
    /// min over interior nodes of min_i sigma_i(eta) (raw, scale-carrying).
    double min_raw_margin = std::numeric_limits<double>::infinity();

    double sup() const { return std::max(interior_sup, boundary_sup); }
};

/// Evaluate every nodal equation at the iterate `u`.  If the iterate is
/// inadmissible somewhere, either throws NodeAdmissibilityError (default) or
/// returns early with `admissible = false` and the offending node recorded.
inline SystemEvaluation evaluate_system(const ScalarField& u, const ProblemSpec& p,
                                        bool throw_on_violation = true) {
    const GridDomain& g = *p.domain;
    SystemEvaluation ev;
    ev.residual = Eigen::VectorXd::Zero(g.node_count());

    for (const long node : g.interior_nodes()) {
        const Eigen::MatrixXd M = hessian_at_node(u, node);
        const SpectralData sd = SpectralData::analyze(M);
        const Spectrum eta = transformed_spectrum(sd.eigenvalues, p.op);
        const Eigen::VectorXd e = elementary_symmetric_all(eta, p.op.k);
        bool member = true;
        for (int i = 1; i <= p.op.k; ++i) member = member && e[i] > 0.0;
        if (!member) {
            ev.admissible = false;
            ev.violating_node = node;
            ev.violation_margins = e.segment(1, p.op.k);
            if (throw_on_violation)
                throw NodeAdmissibilityError(node, g.coords(node), ev.violation_margins);
            return ev;
        }
        ev.min_cone_margin =
            std::min(ev.min_cone_margin, sampling::normalized_cone_margin(eta, p.op.k));
        ev.min_raw_margin = std::min(ev.min_raw_margin, e.segment(1, p.op.k).minCoeff());

        const Eigen::Vector3d x = g.coords(node);
        const double z = u.values[node];
        const double fv = p.f(x, z);
        if (!std::isfinite(fv) || fv < -1e-12)
            throw std::domain_error("interior datum f must be finite and nonnegative at node " +
                                    std::to_string(node) + " (f = " + std::to_string(fv) + ")");
        const double value = std::pow(e[p.op.k] / e[p.op.l], 1.0 / double(p.op.degree()));
        const double r = value - fv;
        ev.residual[node] = r;
        if (std::abs(r) > ev.interior_sup) {
            ev.interior_sup = std::abs(r);
            ev.interior_worst = node;
        }
    }

    for (const long node : g.boundary_nodes()) {
        const auto& bn = g.boundary_info(node);
        const Eigen::Vector3d du = gradient_at_node(u, node);
        const double r = bn.beta_mean.dot(du) - p.phi_mean(bn, u.values[node]);
        ev.residual[node] = r;
        if (std::abs(r) > ev.boundary_sup) {
            ev.boundary_sup = std::abs(r);
            ev.boundary_worst = node;
        }
    }
    return ev;
}

/// The Newton system at an iterate: matrix * delta = rhs with rhs = -residual.
struct LinearizedSystem {
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd rhs;
    double min_row_sup = 0.0;  // smallest row-wise max |entry|, a singularity smoke check
};

/// Assemble the exact linearization of every nodal equation at `u`.  Throws
/// NodeAdmissibilityError if the iterate is inadmissible anywhere.
inline LinearizedSystem assemble_linearization(const ScalarField& u, const ProblemSpec& p) {
    const GridDomain& g = *p.domain;
    const long N = g.node_count();
    const double h = g.spacing();
    const int d = g.dim();

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(size_t(N) * (d == 3 ? 24 : 12));
    Eigen::VectorXd rhs(N);

    for (const long node : g.interior_nodes()) {
        const auto idx = g.multi(node);
        const Eigen::MatrixXd M = hessian_at_node(u, node);
        Eigen::MatrixXd G;
        try {
            G = gradient_matrix(M, p.op, /*normalized=*/true);
        } catch (const ConeViolation& cv) {
            throw NodeAdmissibilityError(node, g.coords(node), cv.margins);
        }

        // Pure second-derivative terms: sum_a G(a,a) * D2_aa.
        for (int a = 0; a < d; ++a) {
            const auto taps = stencil::second(stencil::side_for(idx[a], g.count(a)));
            for (const auto& t : taps) {
                if (t.weight == 0.0) continue;
                auto shifted = idx;
                shifted[a] += t.offset;
                trips.emplace_back(int(node), int(g.flat(shifted[0], shifted[1], shifted[2])),
                                   G(a, a) * t.weight / (h * h));
            }
        }
        // Mixed terms: both (a,b) and (b,a) contribute, hence the factor 2.
        for (int a = 0; a < d; ++a) {
            for (int b = a + 1; b < d; ++b) {
                const auto ta = stencil::first(stencil::side_for(idx[a], g.count(a)));
                const auto tb = stencil::first(stencil::side_for(idx[b], g.count(b)));
                for (const auto& pa : ta) {
                    if (pa.weight == 0.0) continue;
                    for (const auto& pb : tb) {
                        if (pb.weight == 0.0) continue;
                        auto shifted = idx;
                        shifted[a] += pa.offset;
                        shifted[b] += pb.offset;
                        trips.emplace_back(
                            int(node), int(g.flat(shifted[0], shifted[1], shifted[2])),
                            2.0 * G(a, b) * pa.weight * pb.weight / (h * h));
                    }
                }
            }
        }
        // Zero-order term from the z-dependence of f.
        const Eigen::Vector3d x = g.coords(node);
        const double z = u.values[node];
        trips.emplace_back(int(node), int(node), -p.f_z(x, z));

        const Eigen::VectorXd e =
            elementary_symmetric_all(transformed_spectrum(SpectralData::analyze(M).eigenvalues,
                                                          p.op),
                                     p.op.k);
        rhs[node] = -(std::pow(e[p.op.k] / e[p.op.l], 1.0 / double(p.op.degree())) - p.f(x, z));
    }

    for (const long node : g.boundary_nodes()) {
        const auto& bn = g.boundary_info(node);
        const auto idx = g.multi(node);
        for (int a = 0; a < d; ++a) {
            if (bn.beta_mean[a] == 0.0) continue;
            const auto taps = stencil::first(stencil::side_for(idx[a], g.count(a)));
            for (const auto& t : taps) {
                if (t.weight == 0.0) continue;
                auto shifted = idx;
                shifted[a] += t.offset;
                trips.emplace_back(int(node), int(g.flat(shifted[0], shifted[1], shifted[2])),
                                   bn.beta_mean[a] * t.weight / h);
            }
        }
        const double z = u.values[node];
        trips.emplace_back(int(node), int(node), -p.phi_z_mean(bn, z));
        rhs[node] = -(bn.beta_mean.dot(gradient_at_node(u, node)) - p.phi_mean(bn, z));
    }

    LinearizedSystem sys;
    sys.matrix.resize(N, N);
    sys.matrix.setFromTriplets(trips.begin(), trips.end());
    sys.rhs = std::move(rhs);

    Eigen::VectorXd row_sup = Eigen::VectorXd::Zero(N);
    for (int col = 0; col < sys.matrix.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.matrix, col); it; ++it)
            row_sup[it.row()] = std::max(row_sup[it.row()], std::abs(it.value()));
    sys.min_row_sup = row_sup.minCoeff();
    return sys;
}

}  // namespace hessquot
