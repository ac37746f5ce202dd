#pragma once

// Uniform tensor grids on axis-aligned boxes in 2 or 3 dimensions, scalar
// fields over them, and the second-order difference stencils the solver
// uses.  Boundary nodes carry their inward normal and a sampled oblique
// direction field; nodes shared by several faces (box edges and corners)
// store the per-face data plus the averaged direction, so residuals and rows
// can follow the face-average rule.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hessquot {

enum class NodeClass { Interior, Face, Edge, Corner };

/// Oblique direction sampled at a boundary point: receives the position and
/// the unit inward normal of the face being visited, returns the direction
/// (must be unit length up to 1e-8; it is renormalized exactly).
using ObliqueField =
    std::function<Eigen::Vector3d(const Eigen::Vector3d&, const Eigen::Vector3d&)>;

/// The default oblique field: the inward normal itself.
inline ObliqueField normal_oblique_field() {
    return [](const Eigen::Vector3d&, const Eigen::Vector3d& nu) { return nu; };
}

class GridDomain {
public:
    struct BoundaryNode {
        long flat = -1;
        /// Faces meeting at this node as (axis, side) with side 0 = low.
        std::vector<std::pair<int, int>> faces;
        Eigen::Vector3d nu = Eigen::Vector3d::Zero();         // unit, face-averaged
        Eigen::Vector3d beta = Eigen::Vector3d::Zero();       // unit, face-averaged
        Eigen::Vector3d beta_mean = Eigen::Vector3d::Zero();  // arithmetic face mean
        double obliqueness = 0.0;                             // <beta, nu>
    };

    /// Uniform box grid: `resolution` cells along axis 0 fixes the spacing;
    /// the remaining extents must be integer multiples of it.
    static std::shared_ptr<const GridDomain> box(int dim, const Eigen::Vector3d& lo,
                                                 const Eigen::Vector3d& hi, int resolution,
                                                 ObliqueField beta = normal_oblique_field()) {
        if (dim != 2 && dim != 3)
            throw std::invalid_argument("grid dimension must be 2 or 3");
        if (resolution < 2)
            throw std::invalid_argument("grid resolution must be at least 2 cells");
        auto g = std::shared_ptr<GridDomain>(new GridDomain());
        g->m_dim = dim;
        g->m_lo = lo;
        g->m_hi = hi;
        g->m_h = (hi[0] - lo[0]) / double(resolution);
        if (!(g->m_h > 0.0)) throw std::invalid_argument("box extents must be positive");
        for (int a = 0; a < 3; ++a) {
            if (a >= dim) {
                g->m_counts[a] = 1;
                continue;
            }
            const double cells = (hi[a] - lo[a]) / g->m_h;
            const long rounded = std::lround(cells);
            if (rounded < 2 || std::abs(cells - double(rounded)) > 1e-9 * (1.0 + cells))
                throw std::invalid_argument(
                    "box extent along axis " + std::to_string(a) +
                    " is not a multiple (>= 2) of the grid spacing");
            g->m_counts[a] = int(rounded) + 1;
        }
        g->build(std::move(beta));
        return g;
    }

    int dim() const { return m_dim; }
    double spacing() const { return m_h; }
    int count(int axis) const { return m_counts[axis]; }
    long node_count() const { return long(m_counts[0]) * m_counts[1] * m_counts[2]; }

    long flat(int i, int j, int k = 0) const {
        return i + long(m_counts[0]) * (j + long(m_counts[1]) * k);
    }
    std::array<int, 3> multi(long f) const {
        std::array<int, 3> idx;
        idx[0] = int(f % m_counts[0]);
        f /= m_counts[0];
        idx[1] = int(f % m_counts[1]);
        idx[2] = int(f / m_counts[1]);
        return idx;
    }
    Eigen::Vector3d coords(long f) const {
        const auto idx = multi(f);
        Eigen::Vector3d x = Eigen::Vector3d::Zero();
        for (int a = 0; a < m_dim; ++a) x[a] = m_lo[a] + m_h * idx[a];
        return x;
    }

    NodeClass node_class(long f) const { return m_class[size_t(f)]; }
    bool is_interior(long f) const { return m_class[size_t(f)] == NodeClass::Interior; }

    const std::vector<long>& interior_nodes() const { return m_interior; }
    const std::vector<long>& boundary_nodes() const { return m_boundary_flat; }

    const BoundaryNode& boundary_info(long f) const {
        const long slot = m_boundary_slot[size_t(f)];
        if (slot < 0)
            throw std::invalid_argument("node " + std::to_string(f) + " is not a boundary node");
        return m_boundary[size_t(slot)];
    }

    /// Unit inward normal of one face.
    Eigen::Vector3d face_normal(int axis, int side) const {
        Eigen::Vector3d nu = Eigen::Vector3d::Zero();
        nu[axis] = (side == 0) ? 1.0 : -1.0;
        return nu;
    }

    /// min over boundary nodes of <beta, nu>; strictly positive by invariant.
    double obliqueness_floor() const { return m_obliqueness_floor; }

private:
    GridDomain() = default;

    void build(ObliqueField beta_field) {
        const long N = node_count();
        m_class.resize(size_t(N));
        m_boundary_slot.assign(size_t(N), -1);

        for (long f = 0; f < N; ++f) {
            const auto idx = multi(f);
            std::vector<std::pair<int, int>> faces;
            for (int a = 0; a < m_dim; ++a) {
                if (idx[a] == 0) faces.emplace_back(a, 0);
                else if (idx[a] == m_counts[a] - 1) faces.emplace_back(a, 1);
            }
            if (faces.empty()) {
                m_class[size_t(f)] = NodeClass::Interior;
                m_interior.push_back(f);
                continue;
            }
            m_class[size_t(f)] = faces.size() == 1 ? NodeClass::Face
                                : (faces.size() == 2 && m_dim == 3) ? NodeClass::Edge
                                                                    : NodeClass::Corner;

            BoundaryNode bn;
            bn.flat = f;
            bn.faces = faces;
            const Eigen::Vector3d x = coords(f);
            Eigen::Vector3d nu_sum = Eigen::Vector3d::Zero();
            Eigen::Vector3d beta_sum = Eigen::Vector3d::Zero();
            for (const auto& [axis, side] : faces) {
                const Eigen::Vector3d nu_f = face_normal(axis, side);
                Eigen::Vector3d b = beta_field(x, nu_f);
                const double len = b.norm();
                if (std::abs(len - 1.0) > 1e-8)
                    throw std::invalid_argument(
                        "oblique direction is not unit length at a boundary node (|beta| = " +
                        std::to_string(len) + ")");
                b /= len;
                nu_sum += nu_f;
                beta_sum += b;
            }
            bn.nu = nu_sum.normalized();
            bn.beta_mean = beta_sum / double(faces.size());
            const double bl = bn.beta_mean.norm();
            if (bl < 1e-12)
                throw std::invalid_argument(
                    "face-averaged oblique direction vanishes at a corner node");
            bn.beta = bn.beta_mean / bl;
            bn.obliqueness = bn.beta.dot(bn.nu);
            if (!(bn.obliqueness > 0.0))
                throw std::invalid_argument(
                    "oblique direction is tangential or outward at a boundary node "
                    "(<beta, nu> = " + std::to_string(bn.obliqueness) + ")");
            m_obliqueness_floor = std::min(m_obliqueness_floor, bn.obliqueness);

            m_boundary_slot[size_t(f)] = long(m_boundary.size());
            m_boundary.push_back(std::move(bn));
            m_boundary_flat.push_back(f);
        }
    }

    int m_dim = 0;
    Eigen::Vector3d m_lo = Eigen::Vector3d::Zero(), m_hi = Eigen::Vector3d::Zero();
    double m_h = 0.0;
    std::array<int, 3> m_counts = {1, 1, 1};
    std::vector<NodeClass> m_class;
    std::vector<long> m_interior;
    std::vector<long> m_boundary_flat;
    std::vector<long> m_boundary_slot;
    std::vector<BoundaryNode> m_boundary;
    double m_obliqueness_floor = std::numeric_limits<double>::infinity();
};

/// Nodal scalar field bound to its grid.
struct ScalarField {
    std::shared_ptr<const GridDomain> domain;
    Eigen::VectorXd values;

    ScalarField() = default;
    ScalarField(std::shared_ptr<const GridDomain> d, Eigen::VectorXd v)
        : domain(std::move(d)), values(std::move(v)) {
        if (!domain) throw std::invalid_argument("scalar field needs a grid");
        if (values.size() != domain->node_count())
            throw std::invalid_argument("scalar field size does not match the grid");
        if (!values.allFinite())
            throw std::invalid_argument("scalar field contains a non-finite value");
    }
};

/// Sample a callable x -> value at every node.
inline ScalarField sample(std::shared_ptr<const GridDomain> domain,
                          const std::function<double(const Eigen::Vector3d&)>& fn) {
    Eigen::VectorXd v(domain->node_count());
    for (long f = 0; f < domain->node_count(); ++f) v[f] = fn(domain->coords(f));
    return ScalarField(std::move(domain), std::move(v));
}

// ---------------------------------------------------------------------------
// Difference stencils.  All are second-order accurate; away from the boundary
// they are the usual central formulas, on the boundary they fall back to
// one-sided forms of the same order (no ghost values anywhere).
// ---------------------------------------------------------------------------

namespace stencil {

struct Tap {
    int offset;     // node offset along one axis
    double weight;  // coefficient, excluding the 1/h or 1/h^2 factor
};

/// Three-point first derivative along one axis. side: -1 backward, 0 central,
/// +1 forward. Weights carry the 1/(2h) factor via caller division by h.
inline std::array<Tap, 3> first(int side) {
    if (side > 0) return {{{0, -1.5}, {1, 2.0}, {2, -0.5}}};
    if (side < 0) return {{{0, 1.5}, {-1, -2.0}, {-2, 0.5}}};
    return {{{-1, -0.5}, {0, 0.0}, {1, 0.5}}};
}

/// Pure second derivative along one axis; central 3-point or one-sided
/// 4-point, both O(h^2). Weights carry the 1/h^2 factor via caller division.
inline std::array<Tap, 4> second(int side) {
    if (side > 0) return {{{0, 2.0}, {1, -5.0}, {2, 4.0}, {3, -1.0}}};
    if (side < 0) return {{{0, 2.0}, {-1, -5.0}, {-2, 4.0}, {-3, -1.0}}};
    return {{{-1, 1.0}, {0, -2.0}, {1, 1.0}, {0, 0.0}}};
}

/// Which one-sided fallback (if any) an index position needs on an axis with
/// `count` nodes: -1 backward, 0 central, +1 forward.
inline int side_for(int index, int count) {
    if (index == 0) return +1;
    if (index == count - 1) return -1;
    return 0;
}

}  // namespace stencil

/// Gradient estimate at any node: central differences inside, one-sided
/// 3-point at the boundary, exact on quadratics either way.  Components
/// beyond the grid dimension are zero.
inline Eigen::Vector3d gradient_at_node(const ScalarField& u, long f) {
    const GridDomain& g = *u.domain;
    const auto idx = g.multi(f);
    Eigen::Vector3d grad = Eigen::Vector3d::Zero();
    for (int a = 0; a < g.dim(); ++a) {
        const auto taps = stencil::first(stencil::side_for(idx[a], g.count(a)));
        double acc = 0.0;
        for (const auto& t : taps) {
            if (t.weight == 0.0) continue;
            auto shifted = idx;
            shifted[a] += t.offset;
            acc += t.weight * u.values[g.flat(shifted[0], shifted[1], shifted[2])];
        }
        grad[a] = acc / g.spacing();
    }
    return grad;
}

/// Hessian estimate at any node, exactly symmetric, dim x dim.  Interior
/// nodes use the central 3-point diagonal and 4-point cross stencils; at the
/// boundary each direction that lacks a neighbor switches to its one-sided
/// second-order form (cross terms compose two one-sided first derivatives).
inline Eigen::MatrixXd hessian_at_node(const ScalarField& u, long f) {
    const GridDomain& g = *u.domain;
    const auto idx = g.multi(f);
    const double h = g.spacing();
    const int d = g.dim();
    Eigen::MatrixXd H(d, d);

    for (int a = 0; a < d; ++a) {
        const auto taps = stencil::second(stencil::side_for(idx[a], g.count(a)));
        double acc = 0.0;
        for (const auto& t : taps) {
            if (t.weight == 0.0) continue;
            auto shifted = idx;
            shifted[a] += t.offset;
            acc += t.weight * u.values[g.flat(shifted[0], shifted[1], shifted[2])];
        }
        H(a, a) = acc / (h * h);
    }

    for (int a = 0; a < d; ++a) {
        for (int b = a + 1; b < d; ++b) {
            const auto ta = stencil::first(stencil::side_for(idx[a], g.count(a)));
            const auto tb = stencil::first(stencil::side_for(idx[b], g.count(b)));
            double acc = 0.0;
            for (const auto& pa : ta) {
                if (pa.weight == 0.0) continue;
                for (const auto& pb : tb) {
                    if (pb.weight == 0.0) continue;
                    auto shifted = idx;
                    shifted[a] += pa.offset;
                    shifted[b] += pb.offset;
                    acc += pa.weight * pb.weight *
                           u.values[g.flat(shifted[0], shifted[1], shifted[2])];
                }
            }
            H(a, b) = H(b, a) = acc / (h * h);
        }
    }
    return H;
}

}  // namespace hessquot
