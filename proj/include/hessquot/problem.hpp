#pragma once

// A complete discrete problem instance: the operator, the grid, the interior
// datum f (and its z-derivative) and the boundary datum phi (and its
// z-derivative), plus the monotonicity floor gamma0 for phi_z.  Construction
// validates the structural assumptions on a sample lattice so that bad data
// fails fast instead of corrupting a solve.

#include <hessquot/grid.hpp>
#include <hessquot/quotient_operator.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

namespace hessquot {

/// Interior datum: (x, z) -> value.
using InteriorDatum = std::function<double(const Eigen::Vector3d&, double)>;
/// Boundary datum: (x, z, unit inward normal of the face) -> value.
using BoundaryDatum =
    std::function<double(const Eigen::Vector3d&, double, const Eigen::Vector3d&)>;

struct ProblemSpec {
    std::shared_ptr<const GridDomain> domain;
    OperatorSpec op;
    InteriorDatum f;        // right-hand side, must be >= 0
    InteriorDatum f_z;      // its z-derivative, must be >= 0
    BoundaryDatum phi;      // boundary datum
    BoundaryDatum phi_z;    // its z-derivative, must be >= gamma0
    double gamma0 = 0.0;    // strict monotonicity floor for phi_z
    std::optional<ScalarField> subsolution;  // optional solver seed / comparison anchor

    ProblemSpec(std::shared_ptr<const GridDomain> domain_, OperatorSpec op_, InteriorDatum f_,
                InteriorDatum f_z_, BoundaryDatum phi_, BoundaryDatum phi_z_, double gamma0_,
                std::optional<ScalarField> subsolution_ = std::nullopt)
        : domain(std::move(domain_)),
          op(op_),
          f(std::move(f_)),
          f_z(std::move(f_z_)),
          phi(std::move(phi_)),
          phi_z(std::move(phi_z_)),
          gamma0(gamma0_),
          subsolution(std::move(subsolution_)) {
        if (!domain) throw std::invalid_argument("problem needs a grid");
        if (op.n != domain->dim())
            throw std::invalid_argument("operator dimension does not match the grid");
        if (!f || !f_z || !phi || !phi_z)
            throw std::invalid_argument("problem data functions must all be set");
        if (!(gamma0 > 0.0))
            throw std::invalid_argument("the boundary monotonicity floor gamma0 must be positive");
        if (subsolution && subsolution->domain.get() != domain.get())
            throw std::invalid_argument("supplied subsolution lives on a different grid");
        validate_samples();
    }

    /// Evaluate the face-averaged boundary datum at a boundary node.
    double phi_mean(const GridDomain::BoundaryNode& bn, double z) const {
        const Eigen::Vector3d x = domain->coords(bn.flat);
        double acc = 0.0;
        for (const auto& [axis, side] : bn.faces) acc += phi(x, z, domain->face_normal(axis, side));
        return acc / double(bn.faces.size());
    }

    /// Face-averaged z-derivative of the boundary datum at a boundary node.
    double phi_z_mean(const GridDomain::BoundaryNode& bn, double z) const {
        const Eigen::Vector3d x = domain->coords(bn.flat);
        double acc = 0.0;
        for (const auto& [axis, side] : bn.faces)
            acc += phi_z(x, z, domain->face_normal(axis, side));
        return acc / double(bn.faces.size());
    }

private:
    // Samples every grid node at a handful of z values.  This is a smoke
    // check, not a proof: residual evaluation re-checks signs pointwise at
    // the values it actually uses.
    void validate_samples() const {
        static constexpr double z_samples[] = {-2.0, -0.5, 0.0, 0.5, 2.0};
        const double tol = 1e-12;
        for (long node = 0; node < domain->node_count(); ++node) {
            const Eigen::Vector3d x = domain->coords(node);
            for (const double z : z_samples) {
                const double fv = f(x, z);
                const double fzv = f_z(x, z);
                if (!std::isfinite(fv) || fv < -tol)
                    throw std::domain_error("interior datum f must be finite and nonnegative (f = " +
                                            std::to_string(fv) + " at node " +
                                            std::to_string(node) + ", z = " + std::to_string(z) +
                                            ")");
                if (!std::isfinite(fzv) || fzv < -tol)
                    throw std::domain_error(
                        "interior datum derivative f_z must be finite and nonnegative (f_z = " +
                        std::to_string(fzv) + " at node " + std::to_string(node) + ", z = " +
                        std::to_string(z) + ")");
            }
        }
        for (const long node : domain->boundary_nodes()) {
            const auto& bn = domain->boundary_info(node);
            const Eigen::Vector3d x = domain->coords(node);
            for (const double z : z_samples) {
                for (const auto& [axis, side] : bn.faces) {
                    const Eigen::Vector3d nu = domain->face_normal(axis, side);
                    const double pv = phi(x, z, nu);
                    const double pzv = phi_z(x, z, nu);
                    if (!std::isfinite(pv))
                        throw std::domain_error("boundary datum phi must be finite (node " +
                                                std::to_string(node) + ", z = " +
                                                std::to_string(z) + ")");
                    if (!std::isfinite(pzv) || pzv < gamma0 - 1e-12)
                        throw std::domain_error(
                            "boundary datum derivative phi_z must be >= gamma0 (phi_z = " +
                            std::to_string(pzv) + " < " + std::to_string(gamma0) + " at node " +
                            std::to_string(node) + ", z = " + std::to_string(z) + ")");
                }
            }
        }
    }
};

}  // namespace hessquot
