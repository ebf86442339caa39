#include "ouest/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ouest/config.hpp"
#include "ouest/estimators.hpp"
#include "ouest/filter.hpp"
#include "ouest/mc.hpp"
#include "ouest/oracle.hpp"
#include "ouest/prelim.hpp"
#include "ouest/rng.hpp"

namespace ouest {

namespace {

namespace fs = std::filesystem;
using config::json;

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

fs::path resolve_outdir(const CliInvocation& inv) {
    std::string dir = inv.outdir;
    if (dir.empty()) {
        if (const char* env = std::getenv("OUEST_OUT_DIR")) dir = env;
    }
    if (dir.empty()) dir = ".";
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

SamplePath input_or_simulate(const json& cfg, const char* section,
                             const SystemParams& p, const SimConfig& sim) {
    if (cfg.contains(section) && cfg.at(section).contains("input")) {
        const std::string file =
            cfg.at(section).at("input").get<std::string>();
        std::ifstream in(file);
        if (!in)
            throw std::invalid_argument("cannot open " + std::string(section) +
                                        ".input file: " + file);
        return read_path_csv(in, p, sim.seed);
    }
    return simulate(p, sim);
}

std::vector<double> tau_grid_of(const json& cfg, const char* section,
                                const SimConfig& sim, const ParamSpec& spec) {
    if (cfg.contains(section) && cfg.at(section).contains("tau_grid"))
        return cfg.at(section).at("tau_grid").get<std::vector<double>>();
    // default: 20 points from just past the learning fraction to 1
    const double lo = std::pow(sim.horizon_T, spec.delta - 1.0);
    std::vector<double> taus;
    for (int i = 1; i <= 20; ++i) {
        const double tau = lo + (1.0 - lo) * i / 20.0;
        taus.push_back(tau);
    }
    taus.back() = 1.0;
    return taus;
}

EstimatorOpts est_opts_of(const json& cfg, const char* section) {
    EstimatorOpts opts;
    if (cfg.contains(section) && cfg.at(section).contains("norm")) {
        const std::string n = cfg.at(section).at("norm").get<std::string>();
        if (n == "t")
            opts.norm_from_learning_end = false;
        else if (n != "t-Tdelta")
            throw std::invalid_argument(std::string("config key ") + section +
                                        ".norm must be \"t-Tdelta\" or \"t\"");
    }
    return opts;
}

std::string trajectory_csv(const EstimatorTrajectory& est) {
    std::string out = is_pair(est.which) ? "tau,theta_star,theta_star_2\n"
                                         : "tau,theta_star\n";
    for (std::size_t i = 0; i < est.tau.size(); ++i) {
        out += g17(est.tau[i]) + "," + g17(est.theta1[i]);
        if (is_pair(est.which)) out += "," + g17(est.theta2[i]);
        out += "\n";
    }
    return out;
}

int run_dispatch(const CliInvocation& inv) {
    const fs::path outdir = resolve_outdir(inv);
    const json cfg = config::load_with_overrides(inv.config_path, inv.overrides);
    config::check_keys(cfg, inv.subcommand);
    const auto log = [&](const std::string& line) {
        if (inv.verbosity > 0) std::cerr << line << "\n";
    };

    if (inv.subcommand == "oracle") {
        const auto rows = oracle_table();
        std::string jsonl;
        bool all_ok = true;
        std::printf("%-18s %16s %16s %10s %s\n", "quantity", "closed_form",
                    "oracle", "rel_err", "pass");
        for (const auto& r : rows) {
            jsonl += r.to_json() + "\n";
            all_ok = all_ok && r.within_tolerance();
            std::printf("%-18s %16.9g %16.9g %10.2e %s\n", r.quantity.c_str(),
                        r.closed_form, r.oracle_value, r.rel_err,
                        r.within_tolerance() ? "ok" : "FAIL");
        }
        write_file(outdir / "oracle-0.jsonl", jsonl);
        return all_ok ? 0 : 2;
    }

    if (inv.subcommand == "mc") {
        const ExperimentConfig ec = config::parse_experiment(cfg);
        const MCReport report = run_experiment(ec);
        const std::string stem = "mc-" + std::to_string(ec.master_seed);
        write_file(outdir / (stem + ".json"), report_to_json(report));
        write_file(outdir / (stem + "-reps.csv"), rep_records_csv(report));
        if (report.estimator != "prelim" && report.excluded < report.reps) {
            write_file(outdir / (stem + "-var.csv"),
                       variance_profile_csv(report));
            write_file(outdir / (stem + "-qq.csv"), qq_csv(report));
        }
        for (const auto& c : report.checks)
            std::printf("[%s] %s: measured=%.6g target=%.6g tol=%.3g %s\n",
                        c.passed ? "pass" : "FAIL", c.name.c_str(), c.measured,
                        c.target, c.tol, c.note.c_str());
        if (report.failed)
            std::printf("[FAIL] exclusion cap: %ld of %ld replications excluded\n",
                        report.excluded, report.reps);
        log("wall clock: " + std::to_string(report.wall_clock_sec) + " s");
        return report.checks_passed() ? 0 : 2;
    }

    const SystemParams model = config::parse_model(cfg);
    const SimConfig sim = config::parse_sim(cfg);

    if (inv.subcommand == "simulate") {
        const SamplePath path = simulate(model, sim);
        std::ostringstream os;
        write_path_csv(os, path);
        write_file(outdir / ("simulate-" + std::to_string(sim.seed) + ".csv"),
                   os.str());
        log("simulated " + std::to_string(path.n_steps) + " steps, sigma2_hat=" +
            std::to_string(sigma2_hat(path)));
        return 0;
    }

    if (inv.subcommand == "filter") {
        const ParamSpec spec = config::parse_spec(cfg, false);
        if (!cfg.contains("filter") || !cfg.at("filter").contains("theta"))
            throw std::invalid_argument("missing config key: filter.theta");
        const json& f = cfg.at("filter");
        const double theta = f.at("theta").get<double>();
        const double theta2 =
            f.contains("theta2") ? f.at("theta2").get<double>() : 0.0;
        FilterOpts opts;
        if (f.contains("with_mddot"))
            opts.with_mddot = f.at("with_mddot").get<bool>();
        if (f.contains("stationary_gamma"))
            opts.stationary_gamma = f.at("stationary_gamma").get<bool>();
        if (f.contains("m0")) opts.m0 = f.at("m0").get<double>();
        const SamplePath path = input_or_simulate(cfg, "filter", model, sim);
        const FilterTrajectory traj =
            run_filter(path, spec.which, theta, model, opts, theta2);

        std::string out = "t,m";
        if (!traj.mdot.empty()) out += ",mdot";
        if (!traj.mdot2.empty()) out += ",mdot2";
        if (!traj.mddot.empty()) out += ",mddot";
        out += ",gamma\n";
        for (long k = 0; k <= path.n_steps; ++k) {
            out += g17(path.time_at(k)) + "," + g17(traj.m[k]);
            if (!traj.mdot.empty()) out += "," + g17(traj.mdot[k]);
            if (!traj.mdot2.empty()) out += "," + g17(traj.mdot2[k]);
            if (!traj.mddot.empty()) out += "," + g17(traj.mddot[k]);
            out += "," + g17(traj.gamma[k]) + "\n";
        }
        write_file(outdir / ("filter-" + std::to_string(sim.seed) + ".csv"),
                   out);
        return 0;
    }

    if (inv.subcommand == "prelim") {
        const ParamSpec spec = config::parse_spec(cfg);
        const SamplePath path = input_or_simulate(cfg, "prelim", model, sim);
        const PrelimResult res = is_pair(spec.which)
                                     ? prelim_2d(path, spec, model)
                                     : prelim_1d(path, spec, model);
        write_file(outdir / ("prelim-" + std::to_string(sim.seed) + ".json"),
                   res.to_json(path.seed) + "\n");
        log("theta_bar = " + std::to_string(res.theta1));
        return 0;
    }

    if (inv.subcommand == "onestep" || inv.subcommand == "twostep") {
        const char* section = inv.subcommand.c_str();
        const ParamSpec spec = config::parse_spec(cfg);
        const SamplePath path = input_or_simulate(cfg, section, model, sim);
        const std::vector<double> taus = tau_grid_of(cfg, section, sim, spec);
        const EstimatorOpts opts = est_opts_of(cfg, section);
        EstimatorTrajectory est;
        if (inv.subcommand == "twostep") {
            est = two_step_process(path, spec, model, taus, opts);
        } else if (is_pair(spec.which)) {
            const PrelimResult pre = prelim_2d(path, spec, model);
            const double fisher_T =
                cfg.contains("onestep") && cfg.at("onestep").contains("fisher_T")
                    ? cfg.at("onestep").at("fisher_T").get<double>()
                    : 2e4;
            Fisher2x2 info = fisher_matrix_numeric(
                spec.which, pre.theta1, pre.theta2, model, fisher_T, sim.dt,
                mix_seed(path.seed, 0xF15EDULL));
            if (!info.positive_definite)
                throw std::runtime_error(
                    "numeric information matrix not positive definite");
            est = one_step_vector(path, pre, spec, model, taus, info.info, opts);
        } else {
            const PrelimResult pre = prelim_1d(path, spec, model);
            est = one_step_process(path, pre, spec, model, taus, opts);
        }
        write_file(outdir / (inv.subcommand + "-" + std::to_string(sim.seed) +
                             ".csv"),
                   trajectory_csv(est));
        return 0;
    }

    if (inv.subcommand == "adaptive") {
        const ParamSpec spec = config::parse_spec(cfg);
        const SamplePath path = input_or_simulate(cfg, "adaptive", model, sim);
        AdaptiveOpts opts;
        if (cfg.contains("adaptive")) {
            const json& a = cfg.at("adaptive");
            if (a.contains("norm")) {
                const std::string n = a.at("norm").get<std::string>();
                if (n == "t")
                    opts.norm_from_learning_end = false;
                else if (n != "t-Tdelta")
                    throw std::invalid_argument(
                        "config key adaptive.norm must be \"t-Tdelta\" or \"t\"");
            }
            if (a.contains("paper_drift"))
                opts.paper_drift = a.at("paper_drift").get<bool>();
            if (a.contains("guard_widths"))
                opts.guard_widths = a.at("guard_widths").get<double>();
        }
        const PrelimResult pre = prelim_1d(path, spec, model);
        const AdaptiveTrajectory traj =
            adaptive_system(path, pre.theta1, spec, model, opts);
        std::string out = "t,theta_star,m\n";
        for (std::size_t i = 0; i < traj.theta_star.size(); ++i) {
            const double t = path.time_at(traj.k_start + static_cast<long>(i));
            out += g17(t) + "," + g17(traj.theta_star[i]) + "," +
                   g17(traj.m_adaptive[i]) + "\n";
        }
        write_file(outdir / ("adaptive-" + std::to_string(sim.seed) + ".csv"),
                   out);
        if (traj.clamp_count > 0)
            std::printf("note: estimate clamped at the guard interval %ld times\n",
                        traj.clamp_count);
        return 0;
    }

    if (inv.subcommand == "mle-grid") {
        const ParamSpec spec = config::parse_spec(cfg);
        const SamplePath path = input_or_simulate(cfg, "mle-grid", model, sim);
        int grid_size = 50;
        if (cfg.contains("mle-grid") && cfg.at("mle-grid").contains("grid_size"))
            grid_size = cfg.at("mle-grid").at("grid_size").get<int>();
        const GridMleResult res = grid_mle(path, spec, model, grid_size);
        std::string out = "theta,loglik\n";
        for (std::size_t i = 0; i < res.thetas.size(); ++i)
            out += g17(res.thetas[i]) + "," + g17(res.loglik[i]) + "\n";
        write_file(outdir / ("mle-grid-" + std::to_string(sim.seed) + ".csv"),
                   out);
        log("theta_hat = " + std::to_string(res.theta_hat));
        return 0;
    }

    throw std::invalid_argument("unknown subcommand: " + inv.subcommand);
}

}  // namespace

int dispatch(const CliInvocation& inv) {
    try {
        return run_dispatch(inv);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const config::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace ouest
