#pragma once

// Direct solve of the (k=1, l=0) index pair, where the normalized operator
// collapses to a constant-coefficient Laplacian:
//     sigma_1(eta) = (gamma*n + sign) * trace(D2u).
// With data affine in z this makes the whole discrete system linear, so one
// sparse factorization solves it exactly.  It is deliberately assembled here
// from the raw stencils — independently of the Newton path — to serve as
// ground truth for the nonlinear solver on linear problems.

#include <hessquot/discrete_system.hpp>

#include <Eigen/SparseLU>

namespace hessquot {

/// Solve the linear problem for k=1, l=0.  Data are evaluated at z=0 alongside
/// their z-slopes, i.e. f and phi are taken as affine in z; nonlinear
/// z-dependence is outside this oracle's contract.
inline ScalarField linear_reduction_solve(const ProblemSpec& p) {
    if (p.op.k != 1 || p.op.l != 0)
        throw std::invalid_argument("linear reduction requires the index pair k=1, l=0");

    const GridDomain& g = *p.domain;
    const long N = g.node_count();
    const double h = g.spacing();
    const int d = g.dim();
    const double w = p.op.gamma * d + double(p.op.sign);  // coefficient of the Laplacian

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(size_t(N) * size_t(2 * d + 2));
    Eigen::VectorXd rhs(N);

    for (const long node : g.interior_nodes()) {
        const auto idx = g.multi(node);
        for (int a = 0; a < d; ++a) {
            const auto taps = stencil::second(stencil::side_for(idx[a], g.count(a)));
            for (const auto& t : taps) {
                if (t.weight == 0.0) continue;
                auto shifted = idx;
                shifted[a] += t.offset;
                trips.emplace_back(int(node), int(g.flat(shifted[0], shifted[1], shifted[2])),
                                   w * t.weight / (h * h));
            }
        }
        const Eigen::Vector3d x = g.coords(node);
        trips.emplace_back(int(node), int(node), -p.f_z(x, 0.0));
        rhs[node] = p.f(x, 0.0);
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
        trips.emplace_back(int(node), int(node), -p.phi_z_mean(bn, 0.0));
        rhs[node] = p.phi_mean(bn, 0.0);
    }

    Eigen::SparseMatrix<double> A(N, N);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("linear reduction: sparse factorization failed");
    Eigen::VectorXd u = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !u.allFinite())
        throw std::runtime_error("linear reduction: sparse solve failed");
    return ScalarField(p.domain, std::move(u));
}

}  // namespace hessquot
