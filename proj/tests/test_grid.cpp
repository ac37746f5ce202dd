#include <catch2/catch_amalgamated.hpp>

#include <hessquot/discrete_system.hpp>
#include <hessquot/grid.hpp>
#include <hessquot/problem.hpp>

#include <cmath>
#include <map>
#include <set>

using namespace hessquot;
using Catch::Approx;

namespace {

std::shared_ptr<const GridDomain> unit_square(int res) {
    return GridDomain::box(2, Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 1, 0), res);
}

std::shared_ptr<const GridDomain> unit_cube(int res) {
    return GridDomain::box(3, Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 1, 1), res);
}

long count_class(const GridDomain& g, NodeClass c) {
    long n = 0;
    for (long f = 0; f < g.node_count(); ++f)
        if (g.node_class(f) == c) ++n;
    return n;
}

}  // namespace

TEST_CASE("box grids: counts, coordinates, classification", "[grid]") {
    auto g = unit_square(4);
    REQUIRE(g->dim() == 2);
    REQUIRE(g->spacing() == Approx(0.25));
    REQUIRE(g->count(0) == 5);
    REQUIRE(g->count(1) == 5);
    REQUIRE(g->count(2) == 1);
    REQUIRE(g->node_count() == 25);
    REQUIRE(count_class(*g, NodeClass::Interior) == 9);
    REQUIRE(count_class(*g, NodeClass::Face) == 12);
    REQUIRE(count_class(*g, NodeClass::Edge) == 0);
    REQUIRE(count_class(*g, NodeClass::Corner) == 4);
    REQUIRE(long(g->interior_nodes().size()) == 9);
    REQUIRE(long(g->boundary_nodes().size()) == 16);

    // Flat ordering: axis 0 fastest.
    REQUIRE(g->flat(1, 0) == 1);
    REQUIRE(g->flat(0, 1) == 5);
    const auto idx = g->multi(g->flat(3, 2));
    REQUIRE(idx[0] == 3);
    REQUIRE(idx[1] == 2);
    REQUIRE(idx[2] == 0);
    const Eigen::Vector3d x = g->coords(g->flat(3, 2));
    REQUIRE(x[0] == Approx(0.75));
    REQUIRE(x[1] == Approx(0.5));
    REQUIRE(x[2] == 0.0);

    auto c = unit_cube(2);
    REQUIRE(c->node_count() == 27);
    REQUIRE(count_class(*c, NodeClass::Interior) == 1);
    REQUIRE(count_class(*c, NodeClass::Face) == 6);
    REQUIRE(count_class(*c, NodeClass::Edge) == 12);
    REQUIRE(count_class(*c, NodeClass::Corner) == 8);

    auto c4 = unit_cube(4);
    REQUIRE(c4->node_count() == 125);
    REQUIRE(count_class(*c4, NodeClass::Interior) == 27);
    REQUIRE(count_class(*c4, NodeClass::Face) == 54);
    REQUIRE(count_class(*c4, NodeClass::Edge) == 36);
    REQUIRE(count_class(*c4, NodeClass::Corner) == 8);

    // Anisotropic box: extents must be commensurate with the spacing.
    auto a = GridDomain::box(2, Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(2, 1, 0), 8);
    REQUIRE(a->spacing() == Approx(0.25));
    REQUIRE(a->count(0) == 9);
    REQUIRE(a->count(1) == 5);
    REQUIRE_THROWS_AS(GridDomain::box(2, Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1.13, 1, 0), 8),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(GridDomain::box(4, Eigen::Vector3d::Zero(), Eigen::Vector3d::Ones(), 4),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(unit_square(1), std::invalid_argument);
}

TEST_CASE("boundary metadata: normals, default oblique field, corner averaging", "[grid]") {
    auto g = unit_square(4);

    // A face node on x1 = 0.
    const long fn = g->flat(0, 2);
    REQUIRE(g->node_class(fn) == NodeClass::Face);
    const auto& face = g->boundary_info(fn);
    REQUIRE(face.faces.size() == 1);
    REQUIRE(face.faces[0] == std::make_pair(0, 0));
    REQUIRE(face.nu.isApprox(Eigen::Vector3d(1, 0, 0)));
    REQUIRE(face.beta.isApprox(Eigen::Vector3d(1, 0, 0)));
    REQUIRE(face.obliqueness == Approx(1.0));

    // The corner at the origin averages the two meeting faces.
    const long cn = g->flat(0, 0);
    REQUIRE(g->node_class(cn) == NodeClass::Corner);
    const auto& corner = g->boundary_info(cn);
    REQUIRE(corner.faces.size() == 2);
    const double s = 1.0 / std::sqrt(2.0);
    REQUIRE(corner.nu.isApprox(Eigen::Vector3d(s, s, 0), 1e-14));
    REQUIRE(corner.beta.isApprox(Eigen::Vector3d(s, s, 0), 1e-14));
    REQUIRE(corner.beta_mean.isApprox(Eigen::Vector3d(0.5, 0.5, 0), 1e-14));
    REQUIRE(corner.obliqueness == Approx(1.0));

    // The high corner points inward.
    const auto& top = g->boundary_info(g->flat(4, 4));
    REQUIRE(top.nu.isApprox(Eigen::Vector3d(-s, -s, 0), 1e-14));

    REQUIRE(g->obliqueness_floor() == Approx(1.0));
    REQUIRE_THROWS_AS(g->boundary_info(g->flat(2, 2)), std::invalid_argument);

    // A 3D edge node averages two faces, a 3D corner three.
    auto c = unit_cube(4);
    const auto& edge = c->boundary_info(c->flat(0, 0, 2));
    REQUIRE(edge.faces.size() == 2);
    REQUIRE(edge.nu.isApprox(Eigen::Vector3d(s, s, 0), 1e-14));
    const auto& corner3 = c->boundary_info(c->flat(0, 4, 4));
    REQUIRE(corner3.faces.size() == 3);
    const double t3 = 1.0 / std::sqrt(3.0);
    REQUIRE(corner3.nu.isApprox(Eigen::Vector3d(t3, -t3, -t3), 1e-14));
}

TEST_CASE("boundary metadata: slanted oblique fields and rejection", "[grid]") {
    // beta tilts half a unit along the +x2 tangent on every face.
    ObliqueField slanted = [](const Eigen::Vector3d&, const Eigen::Vector3d& nu) {
        Eigen::Vector3d tangent(nu[1], -nu[0], 0.0);  // 90-degree rotation in-plane
        return ((nu + 0.5 * tangent) / std::sqrt(1.25)).eval();
    };
    auto g = GridDomain::box(2, Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 1, 0), 4, slanted);
    const double face_obliq = 1.0 / std::sqrt(1.25);
    const auto& face = g->boundary_info(g->flat(0, 2));
    REQUIRE(face.obliqueness == Approx(face_obliq));
    // The field is a fixed in-plane rotation of nu, so face averaging
    // commutes with it and every corner sees the same angle.
    const auto& corner = g->boundary_info(g->flat(0, 0));
    REQUIRE(corner.obliqueness == Approx(face_obliq));
    REQUIRE(g->obliqueness_floor() == Approx(face_obliq));

    // Non-unit directions are rejected.
    ObliqueField nonunit = [](const Eigen::Vector3d&, const Eigen::Vector3d& nu) {
        return (2.0 * nu).eval();
    };
    REQUIRE_THROWS_AS(
        GridDomain::box(2, Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 1, 0), 4, nonunit),
        std::invalid_argument);

    // Tangential directions are rejected (obliqueness floor would be 0).
    ObliqueField tangential = [](const Eigen::Vector3d&, const Eigen::Vector3d& nu) {
        return Eigen::Vector3d(nu[1], -nu[0], 0.0);
    };
    REQUIRE_THROWS_AS(
        GridDomain::box(2, Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 1, 0), 4, tangential),
        std::invalid_argument);
}

TEST_CASE("stencils are exact on quadratics at every node", "[grid]") {
    const Eigen::Vector3d a(0.7, -1.3, 0.4);
    Eigen::Matrix3d B;
    B << 2.0, 0.5, -0.3, 0.5, 1.1, 0.8, -0.3, 0.8, 3.0;
    const double c = -2.5;
    const auto quad = [&](const Eigen::Vector3d& x) {
        return a.dot(x) + 0.5 * x.dot(B * x) + c;
    };

    for (int dim : {2, 3}) {
        auto g = dim == 2 ? GridDomain::box(2, Eigen::Vector3d(0, 0, 0),
                                            Eigen::Vector3d(1.5, 1, 0), 6)
                          : GridDomain::box(3, Eigen::Vector3d(0, 0, 0),
                                            Eigen::Vector3d(1, 1, 1.5), 4);
        ScalarField u = sample(g, quad);
        for (long f = 0; f < g->node_count(); ++f) {
            const Eigen::Vector3d x = g->coords(f);
            const Eigen::Vector3d grad = gradient_at_node(u, f);
            const Eigen::MatrixXd H = hessian_at_node(u, f);
            for (int i = 0; i < dim; ++i) {
                double gi = a[i];
                for (int j = 0; j < dim; ++j) gi += B(i, j) * x[j];
                REQUIRE(grad[i] == Approx(gi).margin(1e-11));
                for (int j = 0; j < dim; ++j) REQUIRE(H(i, j) == Approx(B(i, j)).margin(1e-10));
            }
            REQUIRE((H - H.transpose()).norm() == 0.0);  // exactly symmetric
        }
    }

    // The documented example: u = x1^2 has first derivative exactly 1.0 at
    // the grid point with x1 = 0.5, via the central stencil.
    auto g = unit_square(4);
    ScalarField u = sample(g, [](const Eigen::Vector3d& x) { return x[0] * x[0]; });
    REQUIRE(gradient_at_node(u, g->flat(2, 2))[0] == 1.0);

    // A constant field has exactly zero gradient and Hessian everywhere.
    ScalarField k = sample(g, [](const Eigen::Vector3d&) { return 3.75; });
    for (long f = 0; f < g->node_count(); ++f) {
        REQUIRE(gradient_at_node(k, f).norm() == 0.0);
        REQUIRE(hessian_at_node(k, f).norm() == 0.0);
    }
}

TEST_CASE("stencil truncation error decays at second order", "[grid]") {
    const auto smooth = [](const Eigen::Vector3d& x) { return std::sin(x[0]) * std::cos(x[1]); };
    const auto exact_grad = [](const Eigen::Vector3d& x) {
        return Eigen::Vector3d(std::cos(x[0]) * std::cos(x[1]),
                               -std::sin(x[0]) * std::sin(x[1]), 0.0);
    };
    const auto exact_hess = [](const Eigen::Vector3d& x) {
        Eigen::Matrix2d H;
        H << -std::sin(x[0]) * std::cos(x[1]), -std::cos(x[0]) * std::sin(x[1]),
            -std::cos(x[0]) * std::sin(x[1]), -std::sin(x[0]) * std::cos(x[1]);
        return H;
    };

    double grad_err[2] = {0, 0}, hess_err[2] = {0, 0};
    const int res[2] = {8, 16};
    for (int pass = 0; pass < 2; ++pass) {
        auto g = unit_square(res[pass]);
        ScalarField u = sample(g, smooth);
        for (long f = 0; f < g->node_count(); ++f) {
            const Eigen::Vector3d x = g->coords(f);
            grad_err[pass] = std::max(
                grad_err[pass],
                (gradient_at_node(u, f).head<2>() - exact_grad(x).head<2>()).cwiseAbs().maxCoeff());
            hess_err[pass] = std::max(
                hess_err[pass],
                (hessian_at_node(u, f) - exact_hess(x)).cwiseAbs().maxCoeff());
        }
    }
    // Halving h should shrink the sup error by about 4; allow drift away from
    // the asymptotic regime.
    REQUIRE(grad_err[0] / grad_err[1] > 2.8);
    REQUIRE(grad_err[0] / grad_err[1] < 5.5);
    REQUIRE(hess_err[0] / hess_err[1] > 2.8);
    REQUIRE(hess_err[0] / hess_err[1] < 5.5);
    REQUIRE(hess_err[1] < 1e-2);
}

namespace {

// A well-posed 2D model problem: normalized (k=2, l=1) quotient with
// gamma = 2 and the minus orientation, data chosen so u*(x) = |x|^2/2 + shift
// solves the discrete system exactly (second-order stencils are exact on
// quadratics and the corner rows average face residuals that each vanish).
struct ModelProblem {
    std::shared_ptr<const GridDomain> grid;
    OperatorSpec op{2, 2, 1, 2.0, -1};
    double ftil_value;

    explicit ModelProblem(int res)
        : grid(GridDomain::box(2, Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 1, 0), res)) {
        // eta_i = gamma*trace - lambda_i = 2*2 - 1 = 3 for u*: F = 9/6 = 1.5.
        ftil_value = 1.5;
    }

    ProblemSpec problem() const {
        const double fv = ftil_value;
        return ProblemSpec(
            grid, op,
            [fv](const Eigen::Vector3d&, double) { return fv; },
            [](const Eigen::Vector3d&, double) { return 0.0; },
            [](const Eigen::Vector3d& x, double z, const Eigen::Vector3d& nu) {
                return nu.dot(x) + (z - 0.5 * x.squaredNorm());
            },
            [](const Eigen::Vector3d&, double, const Eigen::Vector3d&) { return 1.0; }, 1.0);
    }

    ScalarField exact() const {
        return sample(grid, [](const Eigen::Vector3d& x) { return 0.5 * x.squaredNorm(); });
    }
};

}  // namespace

TEST_CASE("residuals: quadratic manufactured solution is exact, corners included", "[grid]") {
    ModelProblem m(5);
    ProblemSpec p = m.problem();
    ScalarField u = m.exact();

    SystemEvaluation ev = evaluate_system(u, p);
    REQUIRE(ev.admissible);
    REQUIRE(ev.interior_sup < 1e-12);
    REQUIRE(ev.boundary_sup < 1e-12);
    REQUIRE(ev.min_cone_margin > 0.0);
    REQUIRE(ev.residual.size() == m.grid->node_count());

    // Shifting by a constant only moves the boundary residual, through the
    // z-slope of phi: B(u* - 1) = +1 at every boundary node.
    ScalarField shifted = u;
    shifted.values.array() -= 1.0;
    SystemEvaluation evs = evaluate_system(shifted, p);
    REQUIRE(evs.interior_sup < 1e-12);
    for (const long node : m.grid->boundary_nodes())
        REQUIRE(evs.residual[node] == Approx(1.0).margin(1e-12));
}

TEST_CASE("residuals: constant field gives boundary residual -c when phi = z", "[grid]") {
    auto g = unit_square(4);
    OperatorSpec op(2, 1, 0, 1.0, 1);
    ProblemSpec p(
        g, op, [](const Eigen::Vector3d&, double) { return 1.0; },
        [](const Eigen::Vector3d&, double) { return 0.0; },
        [](const Eigen::Vector3d&, double z, const Eigen::Vector3d&) { return z; },
        [](const Eigen::Vector3d&, double, const Eigen::Vector3d&) { return 1.0; }, 1.0);

    const double c = 2.25;
    ScalarField u = sample(g, [c](const Eigen::Vector3d&) { return c; });
    for (const long node : g->boundary_nodes()) {
        const auto& bn = g->boundary_info(node);
        const double r = bn.beta_mean.dot(gradient_at_node(u, node)) - p.phi_mean(bn, c);
        REQUIRE(r == Approx(-c).margin(1e-14));
    }
}

TEST_CASE("residuals: inadmissible iterates are reported with the node", "[grid]") {
    ModelProblem m(4);
    ProblemSpec p = m.problem();
    // Concave field: Hessian = -I, eta_i = 2*(-2) + 1 = -3, far outside.
    ScalarField bad = sample(m.grid, [](const Eigen::Vector3d& x) {
        return -0.5 * x.squaredNorm();
    });
    REQUIRE_THROWS_AS(evaluate_system(bad, p), NodeAdmissibilityError);
    try {
        evaluate_system(bad, p);
    } catch (const NodeAdmissibilityError& e) {
        REQUIRE(e.node >= 0);
        REQUIRE(m.grid->node_class(e.node) == NodeClass::Interior);
        REQUIRE(e.margins.minCoeff() <= 0.0);
    }
    SystemEvaluation ev = evaluate_system(bad, p, /*throw_on_violation=*/false);
    REQUIRE_FALSE(ev.admissible);
    REQUIRE(ev.violating_node >= 0);
    REQUIRE(ev.violation_margins.minCoeff() <= 0.0);
    REQUIRE_THROWS_AS(assemble_linearization(bad, p), NodeAdmissibilityError);
}

TEST_CASE("problem validation rejects bad data", "[grid]") {
    auto g = unit_square(4);
    OperatorSpec op(2, 2, 1, 2.0, -1);
    auto zero2 = [](const Eigen::Vector3d&, double) { return 0.0; };
    auto one3 = [](const Eigen::Vector3d&, double, const Eigen::Vector3d&) { return 1.0; };
    auto phi_id = [](const Eigen::Vector3d&, double z, const Eigen::Vector3d&) { return z; };

    // Negative interior datum.
    REQUIRE_THROWS_AS(ProblemSpec(g, op, [](const Eigen::Vector3d&, double) { return -0.5; },
                                  zero2, phi_id, one3, 1.0),
                      std::domain_error);
    // Decreasing z-dependence of f.
    REQUIRE_THROWS_AS(ProblemSpec(g, op, [](const Eigen::Vector3d&, double z) { return 1.0 - z; },
                                  [](const Eigen::Vector3d&, double) { return -1.0; }, phi_id,
                                  one3, 1.0),
                      std::domain_error);
    // phi_z below the declared floor.
    REQUIRE_THROWS_AS(ProblemSpec(g, op,
                                  [](const Eigen::Vector3d&, double) { return 1.0; }, zero2,
                                  phi_id,
                                  [](const Eigen::Vector3d&, double, const Eigen::Vector3d&) {
                                      return 0.25;
                                  },
                                  1.0),
                      std::domain_error);
    // Dimension mismatch and nonpositive floor.
    REQUIRE_THROWS_AS(ProblemSpec(g, OperatorSpec(3, 2, 1, 2.0, -1),
                                  [](const Eigen::Vector3d&, double) { return 1.0; }, zero2,
                                  phi_id, one3, 1.0),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(ProblemSpec(g, op, [](const Eigen::Vector3d&, double) { return 1.0; },
                                  zero2, phi_id, one3, 0.0),
                      std::invalid_argument);
}

TEST_CASE("linearization: linear index pair reduces to the scaled Laplacian", "[grid]") {
    // k = 1, l = 0: F = (gamma*n + sign) * trace, so the interior rows must be
    // exactly (gamma*n + sign) * (discrete Laplacian) - f_z.
    auto g = unit_square(4);
    OperatorSpec op(2, 1, 0, 1.5, -1);
    const double w = op.gamma * 2 + op.sign;  // 2.0
    const double fz = 0.25;
    ProblemSpec p(
        g, op, [](const Eigen::Vector3d&, double z) { return 1.0 + 0.25 * z; },
        [fz](const Eigen::Vector3d&, double) { return fz; },
        [](const Eigen::Vector3d&, double z, const Eigen::Vector3d&) { return z; },
        [](const Eigen::Vector3d&, double, const Eigen::Vector3d&) { return 1.0; }, 1.0);

    ScalarField u = sample(g, [](const Eigen::Vector3d& x) { return 0.5 * x.squaredNorm(); });
    LinearizedSystem sys = assemble_linearization(u, p);
    const double h = g->spacing();

    const long center = g->flat(2, 2);
    std::map<long, double> row;
    for (int col = 0; col < sys.matrix.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.matrix, col); it; ++it)
            if (it.row() == center && it.value() != 0.0) row[it.col()] += it.value();
    REQUIRE(row.size() == 5);
    REQUIRE(row[center] == Approx(-4.0 * w / (h * h) - fz).epsilon(1e-13));
    REQUIRE(row[g->flat(1, 2)] == Approx(w / (h * h)).epsilon(1e-13));
    REQUIRE(row[g->flat(3, 2)] == Approx(w / (h * h)).epsilon(1e-13));
    REQUIRE(row[g->flat(2, 1)] == Approx(w / (h * h)).epsilon(1e-13));
    REQUIRE(row[g->flat(2, 3)] == Approx(w / (h * h)).epsilon(1e-13));

    // A boundary row on the face x1 = 0: one-sided first derivative along the
    // normal, z-slope of phi on the diagonal.
    const long bnode = g->flat(0, 2);
    std::map<long, double> brow;
    for (int col = 0; col < sys.matrix.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.matrix, col); it; ++it)
            if (it.row() == bnode && it.value() != 0.0) brow[it.col()] += it.value();
    REQUIRE(brow.size() == 3);
    REQUIRE(brow[bnode] == Approx(-1.5 / h - 1.0).epsilon(1e-13));
    REQUIRE(brow[g->flat(1, 2)] == Approx(2.0 / h).epsilon(1e-13));
    REQUIRE(brow[g->flat(2, 2)] == Approx(-0.5 / h).epsilon(1e-13));

    REQUIRE(sys.min_row_sup > 0.0);
}

TEST_CASE("linearization row sparsity stays within stencil bounds", "[grid]") {
    for (int dim : {2, 3}) {
        auto g = dim == 2 ? unit_square(5) : unit_cube(4);
        OperatorSpec op(dim, 2, 1, 2.0, -1);
        ProblemSpec p(
            g, op, [](const Eigen::Vector3d&, double) { return 1.0; },
            [](const Eigen::Vector3d&, double) { return 0.0; },
            [](const Eigen::Vector3d& x, double z, const Eigen::Vector3d& nu) {
                return nu.dot(x) + z;
            },
            [](const Eigen::Vector3d&, double, const Eigen::Vector3d&) { return 1.0; }, 1.0);
        // A mildly non-quadratic admissible iterate so cross terms are active.
        ScalarField u = sample(g, [](const Eigen::Vector3d& x) {
            return 0.5 * x.squaredNorm() + 0.05 * std::sin(x[0] + 0.3) * std::cos(x[1] - 0.2) +
                   0.03 * x[0] * x[1] * (x[2] + 1.0);
        });
        LinearizedSystem sys = assemble_linearization(u, p);

        std::vector<std::set<long>> cols(size_t(g->node_count()));
        for (int col = 0; col < sys.matrix.outerSize(); ++col)
            for (Eigen::SparseMatrix<double>::InnerIterator it(sys.matrix, col); it; ++it)
                if (it.value() != 0.0) cols[size_t(it.row())].insert(it.col());

        const size_t interior_bound = dim == 2 ? 9 : 27;  // 3^d stencil box
        for (const long node : g->interior_nodes()) {
            REQUIRE(cols[size_t(node)].size() <= interior_bound);
            REQUIRE(cols[size_t(node)].count(node) == 1);
        }
        for (const long node : g->boundary_nodes()) {
            REQUIRE(cols[size_t(node)].size() <= size_t(2 * dim + 1));
            REQUIRE(cols[size_t(node)].count(node) == 1);
        }
    }
}

TEST_CASE("linearization matches directional differences of the residual", "[grid]") {
    ModelProblem m(6);
    ProblemSpec p = m.problem();
    // Admissible base iterate with a smooth non-quadratic part.
    ScalarField u = sample(m.grid, [](const Eigen::Vector3d& x) {
        return 0.5 * x.squaredNorm() + 0.02 * std::sin(2.0 * x[0] + 0.3) * std::cos(1.7 * x[1]);
    });
    ScalarField v = sample(m.grid, [](const Eigen::Vector3d& x) {
        return std::sin(1.3 * x[0] + 0.1) * std::cos(0.7 * x[1] + 0.5) + 0.5 * x[0] * x[1];
    });

    LinearizedSystem sys = assemble_linearization(u, p);
    const Eigen::VectorXd jv = sys.matrix * v.values;

    const double t = 1e-5;
    ScalarField up = u, um = u;
    up.values += t * v.values;
    um.values -= t * v.values;
    const Eigen::VectorXd fd =
        (evaluate_system(up, p).residual - evaluate_system(um, p).residual) / (2.0 * t);

    const double scale = 1.0 + jv.cwiseAbs().maxCoeff();
    REQUIRE((fd - jv).cwiseAbs().maxCoeff() / scale < 1e-4);

    // rhs must be the negated residual of the base iterate.
    const Eigen::VectorXd r = evaluate_system(u, p).residual;
    REQUIRE((sys.rhs + r).cwiseAbs().maxCoeff() < 1e-14);
}
