#pragma once

// Machine-readable run reports.  One JSON summary describes the run as a
// whole plus one row per stage (a plain solve is a single stage); two CSV
// emitters produce a plot-ready field dump and a convergence table.  All
// numeric text is written at 17 significant digits with no timestamps, so
// identical runs produce byte-identical files.

#include <hessquot/grid.hpp>
#include <hessquot/solver.hpp>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hessquot {

namespace detail_report {

inline std::string num17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << body;
    if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

}  // namespace detail_report

/// Resolve an output file location.  Absolute paths are honored verbatim;
/// relative paths land in $HESSQUOT_REPORT_DIR when that variable is set and
/// non-empty, in the working directory otherwise.
inline std::string resolve_report_path(const std::string& name) {
    namespace fs = std::filesystem;
    fs::path p(name);
    if (p.is_absolute()) return name;
    const char* dir = std::getenv("HESSQUOT_REPORT_DIR");
    if (dir == nullptr || *dir == '\0') return name;
    return (fs::path(dir) / p).string();
}

/// JSON run summary: top-level convergence verdict and diagnostics for the
/// final stage, plus a per-stage array in schedule order.  `epsilons` must
/// parallel `stages`; a plain solve passes one report with epsilon 0.
inline nlohmann::ordered_json summary_json(const std::vector<SolveReport>& stages,
                                           const std::vector<double>& epsilons) {
    if (stages.empty() || stages.size() != epsilons.size())
        throw std::invalid_argument("summary_json: stages and epsilons must align");
    nlohmann::ordered_json doc;
    bool all = true;
    int total_iterations = 0;
    for (const SolveReport& r : stages) {
        all = all && r.converged;
        total_iterations += r.iterations;
    }
    const SolveReport& last = stages.back();
    doc["converged"] = all;
    doc["status"] = to_string(last.status);
    doc["stage_count"] = stages.size();
    doc["iterations"] = total_iterations;
    doc["interior_residual"] = last.interior_residual;
    doc["boundary_residual"] = last.boundary_residual;
    doc["sup_u"] = last.sup_u;
    doc["sup_du"] = last.sup_du;
    doc["sup_d2u"] = last.sup_d2u;
    doc["min_margin"] = last.min_margin;
    doc["message"] = last.message;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const SolveReport& r = stages[i];
        nlohmann::ordered_json row;
        row["epsilon"] = epsilons[i];
        row["converged"] = r.converged;
        row["status"] = to_string(r.status);
        row["iterations"] = r.iterations;
        row["interior_residual"] = r.interior_residual;
        row["boundary_residual"] = r.boundary_residual;
        row["sup_u"] = r.sup_u;
        row["sup_du"] = r.sup_du;
        row["sup_d2u"] = r.sup_d2u;
        row["min_margin"] = r.min_margin;
        rows.push_back(std::move(row));
    }
    doc["stages"] = std::move(rows);
    return doc;
}

inline void write_summary(const std::string& path, const nlohmann::ordered_json& doc) {
    detail_report::write_text(path, doc.dump(2) + "\n");
}

/// Field dump: one row per grid node in flat order with the node coordinates,
/// the solution value, the Euclidean gradient norm and the largest Hessian
/// entry in magnitude, all through the same stencils the solver uses.
inline void write_field_csv(const std::string& path, const ScalarField& u) {
    const GridDomain& g = *u.domain;
    std::string body = g.dim() == 2 ? "x1,x2,u,|Du|,maxabs_D2u\n" : "x1,x2,x3,u,|Du|,maxabs_D2u\n";
    for (long node = 0; node < g.node_count(); ++node) {
        const Eigen::Vector3d x = g.coords(node);
        const Eigen::VectorXd du = gradient_at_node(u, node);
        const Eigen::MatrixXd d2u = hessian_at_node(u, node);
        for (int a = 0; a < g.dim(); ++a) body += detail_report::num17(x[a]) + ",";
        body += detail_report::num17(u.values[node]) + ",";
        body += detail_report::num17(du.norm()) + ",";
        body += detail_report::num17(d2u.cwiseAbs().maxCoeff()) + "\n";
    }
    detail_report::write_text(path, body);
}

/// Convergence table across all stages in schedule order.  The iteration
/// column is a global row counter; each stage contributes its initial
/// residual with step 0 followed by one row per accepted Newton step.
inline void write_convergence_csv(const std::string& path,
                                  const std::vector<SolveReport>& stages) {
    std::string body = "iteration,residual,step\n";
    long row = 0;
    for (const SolveReport& r : stages) {
        for (std::size_t i = 0; i < r.residual_history.size(); ++i) {
            const double step = i == 0 ? 0.0 : r.step_lengths[i - 1];
            body += std::to_string(row++) + "," + detail_report::num17(r.residual_history[i]) +
                    "," + detail_report::num17(step) + "\n";
        }
    }
    detail_report::write_text(path, body);
}

}  // namespace hessquot
