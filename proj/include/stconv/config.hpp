#pragma once

// Experiment configuration, validation and orchestration behind the CLI.
//
// A run is described by one JSON document with a "kind" discriminator; every
// effective field (including defaults) is echoed back into the manifest, so
// a manifest alone reproduces the run. Validation is all-or-nothing: no
// experiment output is produced unless the error list is empty. Warnings
// (summability diagnostics, assumption-violating regimes) never block a run.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stconv/burgers.hpp"
#include "stconv/convolution.hpp"
#include "stconv/estimators.hpp"
#include "stconv/io.hpp"
#include "stconv/spectral.hpp"
#include "stconv/stable.hpp"
#include "stconv/version.hpp"

namespace stconv {

enum class ExperimentKind {
    Convolve,
    SupMoment,
    SmallBall,
    Doob,
    Khintchine,
    MomentCheck,
    Burgers,
    Wiener
};

inline const std::vector<std::pair<std::string, ExperimentKind>>& experiment_kinds() {
    static const std::vector<std::pair<std::string, ExperimentKind>> kinds = {
        {"convolve", ExperimentKind::Convolve},   {"sup-moment", ExperimentKind::SupMoment},
        {"small-ball", ExperimentKind::SmallBall}, {"doob", ExperimentKind::Doob},
        {"khintchine", ExperimentKind::Khintchine}, {"moment-check", ExperimentKind::MomentCheck},
        {"burgers", ExperimentKind::Burgers},     {"wiener", ExperimentKind::Wiener}};
    return kinds;
}

inline ExperimentKind kind_from_string(const std::string& name) {
    for (const auto& [key, kind] : experiment_kinds())
        if (key == name) return kind;
    throw std::invalid_argument("unknown experiment kind \"" + name + "\"");
}

inline std::string to_string(ExperimentKind kind) {
    for (const auto& [key, value] : experiment_kinds())
        if (value == kind) return key;
    return "?";
}

/// gamma_k = k^gamma_exp, beta_k = scale * k^{-beta_exp}, k = 1..count.
inline ModeSet make_power_modes(std::size_t count, double gamma_exp, double beta_exp,
                                double scale) {
    if (count < 1) throw std::invalid_argument("power modes: count must be >= 1");
    std::vector<Mode> entries;
    for (std::size_t k = 1; k <= count; ++k) {
        const double kd = static_cast<double>(k);
        entries.push_back({static_cast<int>(k), std::pow(kd, gamma_exp),
                           scale * std::pow(kd, -beta_exp)});
    }
    return ModeSet(std::move(entries));
}

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::SmallBall;
    ModeSet modes;
    double alpha = 1.5;
    std::string noise = "stable";  // sup-moment engine: "stable" or "wiener"
    std::vector<double> horizons;  // ladder for sup-moment
    double horizon = 1.0;
    std::size_t n_steps = 1024;
    double p = 1.0;
    double theta_tilde = 0.0;
    double theta = 0.0;    // weight exponent for moment-check
    double t_eval = 0.5;   // evaluation time for moment-check
    double epsilon = 1.0;
    std::size_t replicas = 1000;
    std::vector<double> khintchine_h;
    double nu = 0.1;
    bool include_nonlinearity = true;
    std::size_t snapshots = 0;
    double jump_threshold_factor = 5.0;
    Coeffs burgers_x0;  // empty means zero initial state
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    unsigned threads = 1;
    // set when the mode source carried an explicit decay exponent
    std::optional<double> burgers_beta_exp;
};

namespace detail {

inline ModeSet parse_mode_source(const nlohmann::json& spec, std::optional<double>& beta_exp_out) {
    if (spec.contains("file")) {
        const std::string path = spec["file"].get<std::string>();
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open mode file \"" + path + "\"");
        nlohmann::json doc;
        in >> doc;
        return mode_set_from_json(doc);
    }
    if (spec.contains("list")) return mode_set_from_json({{"modes", spec["list"]}});
    if (spec.contains("power")) {
        const auto& p = spec["power"];
        return make_power_modes(p.at("count").get<std::size_t>(),
                                p.value("gamma_exp", 2.0), p.at("beta_exp").get<double>(),
                                p.value("scale", 1.0));
    }
    if (spec.contains("burgers")) {
        const auto& b = spec["burgers"];
        beta_exp_out = b.at("beta_exp").get<double>();
        return burgers_modes(b.at("count").get<std::size_t>(), *beta_exp_out, b.value("scale", 1.0));
    }
    throw std::invalid_argument(
        "mode source must be one of {\"file\", \"list\", \"power\", \"burgers\"}");
}

}  // namespace detail

/// Structural parse of a config document. Throws std::invalid_argument on
/// malformed input; range and precondition checking happens in validate().
inline ExperimentConfig parse_config(nlohmann::json doc) {
    if (doc.contains("config") && doc["config"].is_object()) doc = doc["config"];  // manifest

    ExperimentConfig cfg;
    if (!doc.contains("kind")) throw std::invalid_argument("config requires a \"kind\" field");
    cfg.kind = kind_from_string(doc["kind"].get<std::string>());

    if (doc.contains("modes"))
        cfg.modes = detail::parse_mode_source(doc["modes"], cfg.burgers_beta_exp);
    else if (cfg.kind != ExperimentKind::Khintchine)
        throw std::invalid_argument("config requires a \"modes\" source");

    cfg.alpha = doc.value("alpha", cfg.alpha);
    cfg.noise = doc.value("noise", cfg.noise);
    if (doc.contains("horizons")) cfg.horizons = doc["horizons"].get<std::vector<double>>();
    cfg.horizon = doc.value("T", cfg.horizon);
    cfg.n_steps = doc.value("n_steps", cfg.n_steps);
    cfg.p = doc.value("p", cfg.p);
    cfg.theta_tilde = doc.value("theta_tilde", cfg.theta_tilde);
    cfg.theta = doc.value("theta", cfg.theta);
    cfg.t_eval = doc.value("t", cfg.t_eval);
    cfg.epsilon = doc.value("epsilon", cfg.epsilon);
    cfg.replicas = doc.value("replicas", cfg.replicas);
    if (doc.contains("h")) cfg.khintchine_h = doc["h"].get<std::vector<double>>();
    cfg.nu = doc.value("nu", cfg.nu);
    cfg.include_nonlinearity = doc.value("include_nonlinearity", cfg.include_nonlinearity);
    cfg.snapshots = doc.value("snapshots", cfg.snapshots);
    cfg.jump_threshold_factor = doc.value("jump_threshold_factor", cfg.jump_threshold_factor);
    if (doc.contains("x0")) cfg.burgers_x0 = doc["x0"].get<Coeffs>();
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.out_dir = doc.value("out", cfg.out_dir);
    cfg.threads = doc.value("threads", cfg.threads);
    return cfg;
}

/// Normalized echo of every effective field; feeding this back through
/// parse_config reproduces the run bit-exactly.
inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json modes = nlohmann::json::array();
    for (const Mode& m : cfg.modes)
        modes.push_back({{"k", m.index}, {"gamma", m.gamma}, {"beta", m.beta}});
    nlohmann::json doc{{"kind", to_string(cfg.kind)},
                       {"modes", {{"list", modes}}},
                       {"alpha", cfg.alpha},
                       {"noise", cfg.noise},
                       {"T", cfg.horizon},
                       {"n_steps", cfg.n_steps},
                       {"p", cfg.p},
                       {"theta_tilde", cfg.theta_tilde},
                       {"theta", cfg.theta},
                       {"t", cfg.t_eval},
                       {"epsilon", cfg.epsilon},
                       {"replicas", cfg.replicas},
                       {"nu", cfg.nu},
                       {"include_nonlinearity", cfg.include_nonlinearity},
                       {"snapshots", cfg.snapshots},
                       {"jump_threshold_factor", cfg.jump_threshold_factor},
                       {"seed", cfg.seed},
                       {"out", cfg.out_dir},
                       {"threads", cfg.threads}};
    if (!cfg.horizons.empty()) doc["horizons"] = cfg.horizons;
    if (!cfg.khintchine_h.empty()) doc["h"] = cfg.khintchine_h;
    if (!cfg.burgers_x0.empty()) doc["x0"] = cfg.burgers_x0;
    return doc;
}

struct Violation {
    bool error = true;  // false = warning
    std::string message;
};

inline std::vector<Violation> validate(const ExperimentConfig& cfg) {
    std::vector<Violation> out;
    const auto fail = [&](const std::string& msg) { out.push_back({true, msg}); };
    const auto warn = [&](const std::string& msg) { out.push_back({false, msg}); };

    const bool wiener_engine =
        cfg.kind == ExperimentKind::Wiener ||
        (cfg.kind == ExperimentKind::SupMoment && cfg.noise == "wiener");

    if (!wiener_engine && !(cfg.alpha > 0.0 && cfg.alpha <= 2.0)) fail("alpha out of range (0, 2]");
    if (cfg.kind != ExperimentKind::Khintchine && cfg.modes.empty()) fail("mode set is empty");
    if (cfg.n_steps < 1) fail("n_steps must be >= 1");
    if (cfg.replicas < 1) fail("replicas must be >= 1");
    if (cfg.noise != "stable" && cfg.noise != "wiener") fail("noise must be \"stable\" or \"wiener\"");

    switch (cfg.kind) {
        case ExperimentKind::SupMoment: {
            const auto& ladder = cfg.horizons.empty() ? std::vector<double>{cfg.horizon} : cfg.horizons;
            for (double T : ladder)
                if (!(T > 0.0)) fail("every ladder horizon must be positive");
            if (cfg.noise == "stable" && !(cfg.p > 0.0 && cfg.p < cfg.alpha))
                fail("p must satisfy 0 < p < alpha: alpha-stable noise only has moments of order p < alpha");
            if (cfg.noise == "wiener" && !(cfg.p > 0.0)) fail("p must be positive");
            if (ladder.size() < 4) warn("fewer than 4 ladder points: no scaling exponent will be fitted");
            break;
        }
        case ExperimentKind::SmallBall:
            if (!(cfg.epsilon > 0.0)) fail("epsilon must be positive");
            if (!(cfg.horizon > 0.0)) fail("T must be positive");
            break;
        case ExperimentKind::Doob:
            if (!(cfg.p > 1.0 && cfg.p <= cfg.alpha)) fail("doob requires 1 < p <= alpha");
            if (!(cfg.horizon > 0.0)) fail("T must be positive");
            break;
        case ExperimentKind::Khintchine: {
            bool any = false;
            for (double v : cfg.khintchine_h)
                if (v != 0.0) any = true;
            if (cfg.khintchine_h.empty() || !any) fail("khintchine requires a nonzero \"h\" vector");
            if (!(cfg.p > 0.0)) fail("p must be positive");
            break;
        }
        case ExperimentKind::MomentCheck:
            if (!(cfg.p > 0.0 && cfg.p < cfg.alpha / 2.0))
                fail("moment-check requires 0 < p < alpha/2 (finite-variance estimator)");
            if (!(cfg.t_eval > 0.0)) fail("t must be positive");
            break;
        case ExperimentKind::Burgers: {
            if (!(cfg.nu > 0.0)) fail("nu must be positive");
            if (!(cfg.horizon > 0.0)) fail("T must be positive");
            if (!cfg.modes.empty()) {
                try {
                    (void)detail::burgers_wavenumbers(cfg.modes);
                } catch (const std::invalid_argument& err) {
                    fail(err.what());
                }
            }
            if (!cfg.burgers_x0.empty() && cfg.burgers_x0.size() != cfg.modes.size())
                fail("x0 must align with the mode set");
            if (cfg.burgers_beta_exp &&
                !(*cfg.burgers_beta_exp > 1.0 + 1.0 / (2.0 * cfg.alpha)))
                warn("beta_exp <= 1 + 1/(2 alpha): outside the summability regime of the mild setting");
            break;
        }
        case ExperimentKind::Convolve:
        case ExperimentKind::Wiener:
            if (!(cfg.horizon > 0.0)) fail("T must be positive");
            break;
    }

    const bool has_errors = [&] {
        for (const Violation& v : out)
            if (v.error) return true;
        return false;
    }();
    if (!has_errors && !cfg.modes.empty() && !wiener_engine &&
        cfg.kind != ExperimentKind::Khintchine) {
        const double exponent =
            cfg.kind == ExperimentKind::MomentCheck ? cfg.theta : cfg.theta_tilde;
        if (check_assumption(cfg.modes, cfg.alpha, exponent).divergence_suspected)
            warn("summability diagnostic: sum |beta_k|^alpha gamma_k^{alpha theta} appears to diverge");
    }
    return out;
}

struct RunArtifacts {
    nlohmann::json report;
    std::vector<std::pair<std::string, std::string>> files;  // filename -> body
    std::map<std::string, bool> gates;

    bool gates_passed() const {
        for (const auto& [name, ok] : gates)
            if (!ok) return false;
        return true;
    }
};

namespace detail {

inline bool field_finite(const FieldPath& field) {
    for (std::size_t k = 0; k < field.modes.size(); ++k)
        for (std::size_t j = 0; j < field.grid.n_points(); ++j)
            if (!std::isfinite(field.values.at(k, j))) return false;
    return true;
}

inline double dual_method_sup_gap(const FieldPath& a, const FieldPath& b) {
    double gap = 0.0;
    for (std::size_t j = 0; j < a.grid.n_points(); ++j) {
        double norm2 = 0.0;
        for (std::size_t k = 0; k < a.modes.size(); ++k) {
            const double d = a.values.at(k, j) - b.values.at(k, j);
            norm2 += d * d;
        }
        gap = std::max(gap, norm2);
    }
    return std::sqrt(gap);
}

}  // namespace detail

inline RunArtifacts run_experiment(const ExperimentConfig& cfg) {
    RunArtifacts artifacts;
    nlohmann::json& report = artifacts.report;
    report["kind"] = to_string(cfg.kind);

    switch (cfg.kind) {
        case ExperimentKind::Convolve: {
            const StableLaw law(cfg.alpha);
            const GridSpec grid(cfg.horizon, cfg.n_steps);
            const DrivingPath driving = simulate_driving(cfg.modes, law, grid, cfg.seed);
            const FieldPath weighted = weighted_driving(driving);
            const FieldPath direct = convolve_direct(driving);
            const ByPartsResult parts = convolve_by_parts(driving);

            std::ostringstream csv;
            write_fields_csv(csv, {&weighted, &parts.y, &direct});
            artifacts.files.emplace_back("path.csv", csv.str());

            const bool finite = detail::field_finite(direct) && detail::field_finite(parts.z);
            report["dual_method_sup_gap"] = detail::dual_method_sup_gap(direct, parts.z);
            report["finite"] = finite;
            artifacts.gates["finite_path"] = finite;
            break;
        }
        case ExperimentKind::Wiener: {
            const GridSpec grid(cfg.horizon, cfg.n_steps);
            const WienerResult w = wiener_convolve(cfg.modes, grid, cfg.seed);
            std::ostringstream csv;
            write_fields_csv(csv, {&w.driving, &w.y, &w.z});
            artifacts.files.emplace_back("path.csv", csv.str());
            const bool finite = detail::field_finite(w.z);
            report["finite"] = finite;
            artifacts.gates["finite_path"] = finite;
            break;
        }
        case ExperimentKind::SupMoment: {
            const std::vector<double> ladder =
                cfg.horizons.empty() ? std::vector<double>{cfg.horizon} : cfg.horizons;
            MomentReport mr;
            if (cfg.noise == "wiener") {
                mr = sup_moment_wiener(cfg.modes, cfg.theta_tilde, cfg.p, ladder, cfg.n_steps,
                                       cfg.replicas, cfg.seed, cfg.threads);
            } else {
                const StableLaw law(cfg.alpha);
                mr = sup_moment(cfg.modes, law, cfg.theta_tilde, cfg.p, ladder, cfg.n_steps,
                                cfg.replicas, cfg.seed, cfg.threads);
            }
            report.update(to_json(mr));
            std::ostringstream csv;
            write_ladder_csv(csv, mr);
            artifacts.files.emplace_back("ladder.csv", csv.str());
            artifacts.gates["degenerate_rate"] = !mr.degenerate_gate_failed;
            if (ladder.size() >= 4) artifacts.gates["slope_fitted"] = mr.slope.has_value();
            break;
        }
        case ExperimentKind::SmallBall: {
            const StableLaw law(cfg.alpha);
            const SmallBallReport sb =
                small_ball(cfg.modes, law, cfg.theta_tilde, cfg.epsilon, cfg.horizon, cfg.n_steps,
                           cfg.replicas, cfg.seed, cfg.threads);
            report.update(to_json(sb));
            artifacts.gates["degenerate_rate"] =
                static_cast<double>(sb.degenerate) <=
                kDegenerateGateRate * static_cast<double>(sb.replicas);
            break;
        }
        case ExperimentKind::Doob: {
            const StableLaw law(cfg.alpha);
            const DoobReport dr = doob_check(cfg.modes, law, cfg.theta_tilde, cfg.p, cfg.horizon,
                                             cfg.n_steps, cfg.replicas, cfg.seed, cfg.threads);
            report.update(to_json(dr));
            artifacts.gates["doob_bound"] =
                dr.degenerate_ratio || dr.ratio <= dr.bound + 3.0 * dr.ratio_std_error;
            artifacts.gates["degenerate_rate"] =
                static_cast<double>(dr.degenerate) <=
                kDegenerateGateRate * static_cast<double>(dr.replicas);
            break;
        }
        case ExperimentKind::Khintchine: {
            const KhintchineReport kr =
                khintchine_check(cfg.khintchine_h, cfg.p, cfg.replicas, cfg.seed, cfg.threads);
            report.update(to_json(kr));
            if (cfg.p <= 2.0) {
                const double rel_se = kr.mean_std_error / kr.lp_mean;
                artifacts.gates["khintchine_lower"] = kr.ratio >= 1.0 - 3.0 * rel_se;
            }
            break;
        }
        case ExperimentKind::MomentCheck: {
            const StableLaw law(cfg.alpha);
            const MomentFormulaReport mf =
                moment_formula_check(cfg.modes, law, cfg.theta, cfg.t_eval, cfg.p, cfg.replicas,
                                     cfg.seed, cfg.threads);
            report.update(to_json(mf));
            if (mf.exact_moment > 0.0) {
                const double rel_se = mf.aggregate_std_error / mf.exact_moment;
                artifacts.gates["aggregate_matches_formula"] =
                    std::abs(mf.aggregate_ratio - 1.0) <= 5.0 * rel_se;
            }
            artifacts.gates["degenerate_rate"] =
                static_cast<double>(mf.degenerate) <=
                kDegenerateGateRate * static_cast<double>(2 * mf.replicas);
            break;
        }
        case ExperimentKind::Burgers: {
            const StableLaw law(cfg.alpha);
            const GridSpec grid(cfg.horizon, cfg.n_steps);
            Coeffs x0 = cfg.burgers_x0.empty() ? Coeffs(cfg.modes.size(), 0.0) : cfg.burgers_x0;
            const BurgersState start(cfg.modes, std::move(x0), cfg.nu);
            SolveOptions options;
            options.include_nonlinearity = cfg.include_nonlinearity;
            options.jump_threshold_factor = cfg.jump_threshold_factor;
            try {
                const BurgersTrajectory traj = solve_path(start, grid, law, cfg.seed, options);

                std::ostringstream path_csv;
                write_trajectory_csv(path_csv, traj);
                artifacts.files.emplace_back("path.csv", path_csv.str());

                std::ostringstream energy_csv;
                energy_csv << "t,energy\n";
                for (std::size_t j = 0; j < traj.diagnostics.energy.size(); ++j)
                    energy_csv << format_double(grid.time(j)) << ','
                               << format_double(traj.diagnostics.energy[j]) << '\n';
                artifacts.files.emplace_back("energy.csv", energy_csv.str());

                if (cfg.snapshots > 0) {
                    const std::size_t n_phys = 3 * (cfg.modes.size() / 2) + 1;
                    std::ostringstream snap_csv;
                    snap_csv << "t,xi,u\n";
                    for (std::size_t s = 0; s < cfg.snapshots; ++s) {
                        const std::size_t j =
                            (cfg.snapshots == 1)
                                ? grid.n_steps
                                : s * grid.n_steps / (cfg.snapshots - 1);
                        Coeffs state(cfg.modes.size());
                        for (std::size_t k = 0; k < state.size(); ++k)
                            state[k] = traj.states.at(k, j);
                        const std::vector<double> u = to_physical(cfg.modes, state, n_phys);
                        for (std::size_t m = 0; m < u.size(); ++m) {
                            const double xi = 2.0 * std::numbers::pi * static_cast<double>(m) /
                                              static_cast<double>(n_phys);
                            snap_csv << format_double(grid.time(j)) << ',' << format_double(xi)
                                     << ',' << format_double(u[m]) << '\n';
                        }
                    }
                    artifacts.files.emplace_back("snapshots.csv", snap_csv.str());
                }

                report.update(to_json(traj.diagnostics, "energy.csv"));
                report["completed"] = true;
                artifacts.gates["completed"] = true;
            } catch (const BlowUpError& err) {
                report["completed"] = false;
                report["blow_up"] = {{"step", err.step()}, {"time", err.time()}};
                artifacts.gates["completed"] = false;
            }
            break;
        }
    }
    return artifacts;
}

}  // namespace stconv
