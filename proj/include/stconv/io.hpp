#pragma once

// Serialization of mode sets, field paths and reports.
//
// CSV numbers are written with 17 significant digits so a decimal round
// trip reproduces every double bit-exactly; all writers emit rows in a
// fixed order, so identical inputs give byte-identical bodies.

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stconv/burgers.hpp"
#include "stconv/convolution.hpp"
#include "stconv/estimators.hpp"
#include "stconv/spectral.hpp"

namespace stconv {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// --- ModeSet JSON: {"modes":[{"k":..,"gamma":..,"beta":..},..]} -------------

inline nlohmann::json mode_set_to_json(const ModeSet& modes) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Mode& m : modes) arr.push_back({{"k", m.index}, {"gamma", m.gamma}, {"beta", m.beta}});
    return nlohmann::json{{"modes", arr}};
}

inline ModeSet mode_set_from_json(const nlohmann::json& doc) {
    if (!doc.contains("modes") || !doc["modes"].is_array())
        throw std::invalid_argument("mode set document must contain a \"modes\" array");
    std::vector<Mode> entries;
    for (const auto& item : doc["modes"])
        entries.push_back(Mode{item.at("k").get<int>(), item.at("gamma").get<double>(),
                               item.at("beta").get<double>()});
    return ModeSet(std::move(entries));
}

// --- FieldPath CSV: t,mode_k,value,role -------------------------------------

inline void write_field_csv_rows(std::ostream& os, const FieldPath& field) {
    const char* role = to_string(field.role);
    for (std::size_t k = 0; k < field.modes.size(); ++k) {
        for (std::size_t j = 0; j < field.grid.n_points(); ++j) {
            os << format_double(field.grid.time(j)) << ',' << field.modes[k].index << ','
               << format_double(field.values.at(k, j)) << ',' << role << '\n';
        }
    }
}

inline void write_fields_csv(std::ostream& os, const std::vector<const FieldPath*>& fields) {
    os << "t,mode_k,value,role\n";
    for (const FieldPath* f : fields) write_field_csv_rows(os, *f);
}

struct FieldCsvRow {
    double t = 0.0;
    int mode_k = 0;
    double value = 0.0;
    std::string role;
};

inline std::vector<FieldCsvRow> read_field_csv(std::istream& is) {
    std::vector<FieldCsvRow> rows;
    std::string line;
    if (!std::getline(is, line)) return rows;  // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string t, k, v, role;
        std::getline(ss, t, ',');
        std::getline(ss, k, ',');
        std::getline(ss, v, ',');
        std::getline(ss, role, ',');
        rows.push_back(FieldCsvRow{std::stod(t), std::stoi(k), std::stod(v), role});
    }
    return rows;
}

// --- Burgers trajectory CSV: t,channel,value --------------------------------

inline void write_trajectory_csv(std::ostream& os, const BurgersTrajectory& traj) {
    os << "t,channel,value\n";
    for (std::size_t k = 0; k < traj.modes.size(); ++k)
        for (std::size_t j = 0; j < traj.grid.n_points(); ++j)
            os << format_double(traj.grid.time(j)) << ',' << traj.modes[k].index << ','
               << format_double(traj.states.at(k, j)) << '\n';
}

// --- Ladder CSV: T,estimate,stderr,M ----------------------------------------

inline void write_ladder_csv(std::ostream& os, const MomentReport& report) {
    os << "T,estimate,stderr,M\n";
    for (const LadderPoint& pt : report.points)
        os << format_double(pt.horizon) << ',' << format_double(pt.estimate) << ','
           << format_double(pt.std_error) << ',' << pt.replicas << '\n';
}

// --- Report JSON -------------------------------------------------------------

inline nlohmann::json to_json(const SummabilityReport& r) {
    return {{"partial_sum", r.partial_sum},
            {"tail_quartile_fraction", r.tail_quartile_fraction},
            {"divergence_suspected", r.divergence_suspected}};
}

inline nlohmann::json to_json(const MomentReport& r) {
    nlohmann::json points = nlohmann::json::array();
    for (const LadderPoint& pt : r.points)
        points.push_back({{"T", pt.horizon},
                          {"estimate", pt.estimate},
                          {"stderr", pt.std_error},
                          {"median_of_means", pt.median_of_means},
                          {"M", pt.replicas},
                          {"degenerate", pt.degenerate}});
    nlohmann::json doc{{"p", r.p},
                       {"theta_tilde", r.theta_tilde},
                       {"n_steps", r.n_steps},
                       {"points", points},
                       {"summability_warning", r.summability_warning},
                       {"degenerate_gate_failed", r.degenerate_gate_failed}};
    if (r.slope)
        doc["slope"] = {{"value", r.slope->slope}, {"stderr", r.slope->std_error}};
    return doc;
}

inline nlohmann::json to_json(const SmallBallReport& r) {
    return {{"epsilon", r.epsilon},
            {"T", r.horizon},
            {"theta_tilde", r.theta_tilde},
            {"M", r.replicas},
            {"hits", r.hits},
            {"degenerate", r.degenerate},
            {"wilson_lower_99", r.wilson_lower}};
}

inline nlohmann::json to_json(const DoobReport& r) {
    return {{"p", r.p},
            {"bound", r.bound},
            {"sup_moment", r.sup_moment},
            {"terminal_moment", r.terminal_moment},
            {"ratio", r.ratio},
            {"ratio_stderr", r.ratio_std_error},
            {"M", r.replicas},
            {"degenerate", r.degenerate},
            {"degenerate_ratio", r.degenerate_ratio}};
}

inline nlohmann::json to_json(const KhintchineReport& r) {
    return {{"l2_norm", r.l2_norm},
            {"lp_mean", r.lp_mean},
            {"lp_norm", r.lp_norm},
            {"ratio", r.ratio},
            {"mean_stderr", r.mean_std_error},
            {"M", r.replicas}};
}

inline nlohmann::json to_json(const MomentFormulaReport& r) {
    return {{"scale", r.scale},
            {"exact_moment", r.exact_moment},
            {"aggregate_moment", r.aggregate_moment},
            {"aggregate_stderr", r.aggregate_std_error},
            {"aggregate_ratio", r.aggregate_ratio},
            {"norm_moment", r.norm_moment},
            {"norm_stderr", r.norm_std_error},
            {"norm_ratio", r.norm_ratio},
            {"M", r.replicas},
            {"degenerate", r.degenerate}};
}

inline nlohmann::json to_json(const BurgersDiagnostics& d, const std::string& energy_ref) {
    return {{"max_jump", d.max_jump},
            {"jump_count", d.jumps_above_threshold},
            {"jump_threshold", d.jump_threshold},
            {"jump_alignment", d.jump_alignment},
            {"energy_series_ref", energy_ref}};
}

}  // namespace stconv
