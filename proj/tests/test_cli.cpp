#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "stconv/config.hpp"

using namespace stconv;
using nlohmann::json;

namespace {

json base_config(const std::string& kind) {
    return json{{"kind", kind},
                {"modes", {{"power", {{"count", 4}, {"beta_exp", 2.5}}}}},
                {"alpha", 1.5},
                {"T", 0.5},
                {"n_steps", 64},
                {"replicas", 50},
                {"seed", 11}};
}

bool has_error(const std::vector<Violation>& vs) {
    for (const auto& v : vs)
        if (v.error) return true;
    return false;
}

bool has_warning(const std::vector<Violation>& vs) {
    for (const auto& v : vs)
        if (!v.error) return true;
    return false;
}

}  // namespace

TEST_CASE("parse_config: structure and defaults") {
    const ExperimentConfig cfg = parse_config(base_config("small-ball"));
    CHECK(cfg.kind == ExperimentKind::SmallBall);
    CHECK(cfg.modes.size() == 4);
    CHECK(cfg.alpha == 1.5);
    CHECK(cfg.epsilon == 1.0);   // default
    CHECK(cfg.threads == 1);     // default
    CHECK(cfg.seed == 11);

    CHECK_THROWS_AS(parse_config(json{{"modes", {{"list", json::array()}}}}),
                    std::invalid_argument);  // no kind
    CHECK_THROWS_AS(parse_config(json{{"kind", "nonsense"}}), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(json{{"kind", "small-ball"}}), std::invalid_argument);  // no modes
    json bad_modes = base_config("small-ball");
    bad_modes["modes"] = {{"mystery", 1}};
    CHECK_THROWS_AS(parse_config(bad_modes), std::invalid_argument);

    // khintchine needs no modes
    CHECK_NOTHROW(parse_config(json{{"kind", "khintchine"}, {"h", {1.0, 1.0}}, {"p", 1.0}}));
}

TEST_CASE("parse_config: mode sources") {
    json power = base_config("small-ball");
    const ExperimentConfig p = parse_config(power);
    CHECK(p.modes[1].gamma == 4.0);  // k^2 default gamma_exp
    CHECK(p.modes[1].beta == doctest::Approx(std::pow(2.0, -2.5)));

    json burgers = base_config("burgers");
    burgers["modes"] = {{"burgers", {{"count", 3}, {"beta_exp", 1.25}}}};
    const ExperimentConfig b = parse_config(burgers);
    CHECK(b.modes.size() == 6);
    CHECK(b.burgers_beta_exp.has_value());

    json inline_list = base_config("small-ball");
    inline_list["modes"] = {{"list", {{{"k", 1}, {"gamma", 1.0}, {"beta", 0.5}}}}};
    const ExperimentConfig l = parse_config(inline_list);
    CHECK(l.modes.size() == 1);
    CHECK(l.modes[0].beta == 0.5);
}

TEST_CASE("validate: clean configs pass") {
    json sup = base_config("sup-moment");
    sup["p"] = 1.0;
    sup["horizons"] = {0.0625, 0.125, 0.25, 0.5};
    CHECK_FALSE(has_error(validate(parse_config(sup))));

    CHECK_FALSE(has_error(validate(parse_config(base_config("small-ball")))));
}

TEST_CASE("validate: alpha and moment restrictions") {
    json bad_alpha = base_config("small-ball");
    bad_alpha["alpha"] = 0.0;
    CHECK(has_error(validate(parse_config(bad_alpha))));

    json hot_p = base_config("sup-moment");
    hot_p["p"] = 1.6;  // >= alpha
    hot_p["horizons"] = {0.1, 0.2, 0.4, 0.8};
    CHECK(has_error(validate(parse_config(hot_p))));

    json doob_low = base_config("doob");
    doob_low["p"] = 1.0;
    CHECK(has_error(validate(parse_config(doob_low))));
    json doob_ok = base_config("doob");
    doob_ok["p"] = 1.5;  // p = alpha admissible for the empirical ratio
    CHECK_FALSE(has_error(validate(parse_config(doob_ok))));

    json mc = base_config("moment-check");
    mc["p"] = 0.8;  // >= alpha/2
    CHECK(has_error(validate(parse_config(mc))));
}

TEST_CASE("validate: burgers exponent warning, not error") {
    json soft = base_config("burgers");
    soft["modes"] = {{"burgers", {{"count", 4}, {"beta_exp", 1.0}}}};
    const auto violations = validate(parse_config(soft));
    CHECK_FALSE(has_error(violations));
    CHECK(has_warning(violations));  // beta_exp <= 1 + 1/(2 alpha) = 4/3

    json firm = base_config("burgers");
    firm["modes"] = {{"burgers", {{"count", 4}, {"beta_exp", 1.4}}}};
    CHECK_FALSE(has_warning(validate(parse_config(firm))));
}

TEST_CASE("validate: khintchine and epsilon guards") {
    json kh = json{{"kind", "khintchine"}, {"h", {0.0, 0.0}}, {"p", 1.0}, {"replicas", 10}};
    CHECK(has_error(validate(parse_config(kh))));

    json eps = base_config("small-ball");
    eps["epsilon"] = -1.0;
    CHECK(has_error(validate(parse_config(eps))));

    json steps = base_config("small-ball");
    steps["n_steps"] = 0;
    CHECK(has_error(validate(parse_config(steps))));
}

TEST_CASE("config echo reproduces the configuration") {
    json original = base_config("sup-moment");
    original["horizons"] = {0.125, 0.25, 0.5, 1.0};
    original["p"] = 0.9;
    const ExperimentConfig cfg = parse_config(original);
    const ExperimentConfig round = parse_config(config_to_json(cfg));
    CHECK(round.kind == cfg.kind);
    CHECK(round.p == cfg.p);
    CHECK(round.horizons == cfg.horizons);
    CHECK(round.seed == cfg.seed);
    REQUIRE(round.modes.size() == cfg.modes.size());
    for (std::size_t i = 0; i < cfg.modes.size(); ++i) {
        CHECK(round.modes[i].gamma == cfg.modes[i].gamma);  // bit-exact through JSON
        CHECK(round.modes[i].beta == cfg.modes[i].beta);
    }
}

TEST_CASE("run_experiment: determinism of artifacts") {
    const ExperimentConfig cfg = parse_config(base_config("convolve"));
    const RunArtifacts a = run_experiment(cfg);
    const RunArtifacts b = run_experiment(cfg);
    CHECK(a.report.dump() == b.report.dump());
    REQUIRE(a.files.size() == b.files.size());
    for (std::size_t i = 0; i < a.files.size(); ++i) {
        CHECK(a.files[i].first == b.files[i].first);
        CHECK(a.files[i].second == b.files[i].second);  // byte-identical CSV bodies
    }

    ExperimentConfig other = cfg;
    other.seed = 12;
    const RunArtifacts c = run_experiment(other);
    CHECK(a.files[0].second != c.files[0].second);
}

TEST_CASE("run_experiment: convolve artifacts and gate") {
    const RunArtifacts art = run_experiment(parse_config(base_config("convolve")));
    REQUIRE(art.files.size() == 1);
    CHECK(art.files[0].first == "path.csv");
    CHECK(art.files[0].second.rfind("t,mode_k,value,role\n", 0) == 0);
    CHECK(art.report["dual_method_sup_gap"].get<double>() >= 0.0);
    CHECK(art.gates.at("finite_path"));
    CHECK(art.gates_passed());
}

TEST_CASE("run_experiment: sup-moment ladder artifacts") {
    json cfg_json = base_config("sup-moment");
    cfg_json["p"] = 1.0;
    cfg_json["horizons"] = {0.125, 0.25};
    cfg_json["n_steps"] = 128;
    RunArtifacts art = run_experiment(parse_config(cfg_json));
    REQUIRE(art.files.size() == 1);
    CHECK(art.files[0].first == "ladder.csv");
    CHECK(art.gates.count("slope_fitted") == 0);  // only 2 points requested

    cfg_json["horizons"] = {0.0625, 0.125, 0.25, 0.5};
    art = run_experiment(parse_config(cfg_json));
    CHECK(art.gates.at("slope_fitted"));
    CHECK(art.report.contains("slope"));
}

TEST_CASE("run_experiment: small-ball huge epsilon catches everything") {
    json cfg_json = base_config("small-ball");
    cfg_json["epsilon"] = 1e9;
    cfg_json["replicas"] = 400;
    const RunArtifacts art = run_experiment(parse_config(cfg_json));
    CHECK(art.report["hits"].get<std::size_t>() == 400);
    CHECK(art.report["wilson_lower_99"].get<double>() > 0.95);
    CHECK(art.gates_passed());
}

TEST_CASE("run_experiment: khintchine and moment-check gates") {
    const RunArtifacts kh = run_experiment(parse_config(
        json{{"kind", "khintchine"}, {"h", {1.0, 1.0, 1.0, 1.0}}, {"p", 1.0},
             {"replicas", 20000}, {"seed", 5}}));
    CHECK(kh.gates.at("khintchine_lower"));
    CHECK(kh.report["ratio"].get<double>() == doctest::Approx(4.0 / 3.0).epsilon(0.05));

    json mc = base_config("moment-check");
    mc["p"] = 0.5;
    mc["t"] = 0.5;
    mc["replicas"] = 20000;
    const RunArtifacts art = run_experiment(parse_config(mc));
    CHECK(art.gates.at("aggregate_matches_formula"));
}

TEST_CASE("run_experiment: burgers trajectory with snapshots") {
    json cfg_json = base_config("burgers");
    cfg_json["modes"] = {{"burgers", {{"count", 4}, {"beta_exp", 1.25}}}};
    cfg_json["nu"] = 0.5;
    cfg_json["n_steps"] = 128;
    cfg_json["snapshots"] = 3;
    const RunArtifacts art = run_experiment(parse_config(cfg_json));
    CHECK(art.gates.at("completed"));
    REQUIRE(art.files.size() == 3);
    CHECK(art.files[0].first == "path.csv");
    CHECK(art.files[1].first == "energy.csv");
    CHECK(art.files[2].first == "snapshots.csv");
    CHECK(art.report["energy_series_ref"] == "energy.csv");
    CHECK(art.report["completed"].get<bool>());
}
