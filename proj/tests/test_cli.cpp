#include <doctest.h>

#include <filesystem>
#include <stdexcept>
#include <unistd.h>
#include <fstream>
#include <sstream>

#include "ouest/cli.hpp"
#include "ouest/config.hpp"
#include "ouest/estimators.hpp"
#include "ouest/prelim.hpp"

using namespace ouest;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("ouest_cli_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string str() const { return path.string(); }
};

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* base_config = R"({
  "model": {"a": 1.0, "f": 1.0, "b": 1.0, "sigma": 1.0, "d2": "matched"},
  "spec": {"case": "F", "alpha": 0.5, "beta": 2.0, "delta": 0.6},
  "sim": {"dt": 0.05, "T": 200.0, "seed": 12}
})";

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("help text lists every accepted config key") {
    for (const std::string& sub : config::subcommand_names()) {
        const std::string help = config::help_text(sub);
        for (const std::string& key : config::accepted_keys(sub)) {
            CAPTURE(sub);
            CAPTURE(key);
            CHECK(help.find(key) != std::string::npos);
        }
    }
}

TEST_CASE("unknown keys are rejected with the offending name") {
    auto cfg = config::load_with_overrides("", {"model.bogus=1"});
    bool threw = false;
    try {
        config::check_keys(cfg, "simulate");
    } catch (const std::invalid_argument& e) {
        threw = true;
        CHECK(std::string(e.what()).find("model.bogus") != std::string::npos);
    }
    CHECK(threw);
    CHECK_THROWS_AS(config::check_keys(
                        config::load_with_overrides("", {"mcx.oops=1"}),
                        "simulate"),
                    std::invalid_argument);
}

TEST_CASE("overrides parse JSON values and apply in order") {
    auto cfg = config::load_with_overrides(
        "", {"model.a=2.5", "mc.tau_grid=[0.5,1.0]", "spec.case=B",
             "model.a=3.5"});
    CHECK(cfg["model"]["a"].get<double>() == 3.5);
    CHECK(cfg["mc"]["tau_grid"].size() == 2);
    CHECK(cfg["spec"]["case"].get<std::string>() == "B");
}

TEST_CASE("dispatch: validation failures exit with code 1") {
    TempDir tmp;
    CliInvocation inv;
    inv.subcommand = "simulate";
    inv.outdir = tmp.str();
    inv.overrides = {"sim.dt=0.1", "sim.T=10", "model.f=-1"};
    CHECK(dispatch(inv) == 1);
    inv.overrides = {"sim.dt=0.1", "sim.T=10", "model.nope=1"};
    CHECK(dispatch(inv) == 1);
    inv.subcommand = "definitely-not-a-subcommand";
    inv.overrides.clear();
    CHECK(dispatch(inv) == 1);
}

TEST_CASE("simulate output feeds the downstream subcommands bit-exactly") {
    TempDir tmp;
    const fs::path cfg_path = tmp.path / "cfg.json";
    write(cfg_path, base_config);

    CliInvocation sim;
    sim.subcommand = "simulate";
    sim.config_path = cfg_path.string();
    sim.outdir = tmp.str();
    REQUIRE(dispatch(sim) == 0);
    const fs::path path_csv = tmp.path / "simulate-12.csv";
    REQUIRE(fs::exists(path_csv));

    // in-process reference pipeline
    const auto cfg = config::load_with_overrides(cfg_path.string(), {});
    const SystemParams model = config::parse_model(cfg);
    const ParamSpec spec = config::parse_spec(cfg);
    const SimConfig sc = config::parse_sim(cfg);
    const SamplePath path = simulate(model, sc);
    const PrelimResult pre_ref = prelim_1d(path, spec, model);
    const EstimatorTrajectory est_ref =
        one_step_process(path, pre_ref, spec, model, {1.0});

    // prelim through the CLI consuming the CSV
    CliInvocation pre;
    pre.subcommand = "prelim";
    pre.config_path = cfg_path.string();
    pre.outdir = tmp.str();
    pre.overrides = {"prelim.input=" + path_csv.string()};
    REQUIRE(dispatch(pre) == 0);
    const std::string pre_json = slurp(tmp.path / "prelim-12.json");
    std::ostringstream expect;
    expect.precision(17);
    expect << "\"theta_bar\":" << pre_ref.theta1;
    CHECK(pre_json.find(expect.str()) != std::string::npos);

    // one-step through the CLI consuming the CSV
    CliInvocation one;
    one.subcommand = "onestep";
    one.config_path = cfg_path.string();
    one.outdir = tmp.str();
    one.overrides = {"onestep.input=" + path_csv.string(),
                     "onestep.tau_grid=[1.0]"};
    REQUIRE(dispatch(one) == 0);
    const std::string traj = slurp(tmp.path / "onestep-12.csv");
    std::ostringstream expect_star;
    expect_star.precision(17);
    expect_star << est_ref.theta1[0];
    CHECK(traj.find(expect_star.str()) != std::string::npos);

    // filter through the CLI consuming the CSV
    CliInvocation fil;
    fil.subcommand = "filter";
    fil.config_path = cfg_path.string();
    fil.outdir = tmp.str();
    fil.overrides = {"filter.input=" + path_csv.string(), "filter.theta=1.0"};
    REQUIRE(dispatch(fil) == 0);
    CHECK(fs::exists(tmp.path / "filter-12.csv"));
}

TEST_CASE("mle-grid and adaptive write their artifacts") {
    TempDir tmp;
    const fs::path cfg_path = tmp.path / "cfg.json";
    write(cfg_path, base_config);
    CliInvocation inv;
    inv.config_path = cfg_path.string();
    inv.outdir = tmp.str();

    inv.subcommand = "mle-grid";
    inv.overrides = {"mle-grid.grid_size=11"};
    REQUIRE(dispatch(inv) == 0);
    const std::string grid = slurp(tmp.path / "mle-grid-12.csv");
    CHECK(grid.rfind("theta,loglik", 0) == 0);

    inv.subcommand = "adaptive";
    inv.overrides = {};
    REQUIRE(dispatch(inv) == 0);
    CHECK(fs::exists(tmp.path / "adaptive-12.csv"));

    inv.subcommand = "twostep";
    inv.overrides = {"spec.delta=0.45", "twostep.tau_grid=[1.0]"};
    REQUIRE(dispatch(inv) == 0);
    CHECK(fs::exists(tmp.path / "twostep-12.csv"));
}

TEST_CASE("mc subcommand: exit code 2 on failing named checks") {
    TempDir tmp;
    const fs::path cfg_path = tmp.path / "cfg.json";
    write(cfg_path, std::string(R"({
  "model": {"a": 1.0, "f": 1.0, "b": 1.0, "sigma": 1.0, "d2": "matched"},
  "spec": {"case": "F", "alpha": 0.5, "beta": 2.0, "delta": 0.6},
  "sim": {"dt": 0.05, "T": 200.0},
  "mc": {"reps": 120, "workers": 2, "master_seed": 7, "tau_grid": [1.0]},
  "checks": [{"name": "impossible", "kind": "var_ratio", "tau": 1.0, "tol": 0.0}]
})"));
    CliInvocation inv;
    inv.subcommand = "mc";
    inv.config_path = cfg_path.string();
    inv.outdir = tmp.str();
    CHECK(dispatch(inv) == 2);
    CHECK(fs::exists(tmp.path / "mc-7.json"));
    CHECK(fs::exists(tmp.path / "mc-7-reps.csv"));

    // and exit 0 once the check is attainable
    CliInvocation ok = inv;
    ok.overrides = {"mc.master_seed=8",
                    R"(checks=[{"name":"vr","kind":"var_ratio","tau":1.0,"tol":0.9}])"};
    CHECK(dispatch(ok) == 0);
}

TEST_SUITE_END();
