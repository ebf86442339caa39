#include "ouest/mc.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "ouest/oracle.hpp"
#include "ouest/prelim.hpp"
#include "ouest/rng.hpp"
#include "ouest/stats.hpp"

namespace ouest {

using nlohmann::json;

void ExperimentConfig::validate() const {
    model.validate_estimation();
    spec.validate();
    sim.validate();
    if (reps < 1) throw std::invalid_argument("mc.reps must be >= 1");
    if (workers < 0) throw std::invalid_argument("mc.workers must be >= 0");
    if (tau_grid.empty())
        throw std::invalid_argument("mc.tau_grid must be nonempty");
    for (std::size_t i = 1; i < tau_grid.size(); ++i)
        if (!(tau_grid[i] > tau_grid[i - 1]))
            throw std::invalid_argument("mc.tau_grid must be strictly increasing");
    if (estimator != "onestep" && estimator != "twostep" &&
        estimator != "vector" && estimator != "adaptive" &&
        estimator != "prelim")
        throw std::invalid_argument("mc.estimator: unknown estimator '" +
                                    estimator + "'");
    if (is_pair(spec.which) != (estimator == "vector"))
        throw std::invalid_argument(
            "mc.estimator: pair cases require the vector estimator and "
            "vice versa");
    if (with_grid_mle && estimator != "onestep")
        throw std::invalid_argument(
            "mc.with_grid_mle is only meaningful with the onestep estimator");
}

bool MCReport::checks_passed() const {
    if (failed) return false;
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

std::vector<double> MCReport::scaled_errors(std::size_t tau_index,
                                            int coord) const {
    const double theta0 = coord == 0 ? theta0_1 : theta0_2;
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        if (r.excluded) continue;
        const auto& ts = coord == 0 ? r.theta_star : r.theta_star2;
        if (tau_index >= ts.size()) continue;
        out.push_back(std::sqrt(tau_grid[tau_index] * T) *
                      (ts[tau_index] - theta0));
    }
    return out;
}

namespace {

void run_one_rep(const ExperimentConfig& cfg, long rep, RepRecord& rec,
                 double& est_sec, double& grid_sec) {
    rec.rep = rep;
    rec.seed = mix_seed(cfg.master_seed, static_cast<std::uint64_t>(rep));

    SimConfig sim = cfg.sim;
    sim.seed = rec.seed;
    const SamplePath path = simulate(cfg.model, sim);

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();

    if (cfg.estimator == "vector") {
        const PrelimResult pre = prelim_2d(path, cfg.spec, cfg.model);
        rec.theta_bar = pre.theta1;
        rec.theta_bar2 = pre.theta2;
        rec.clipped1 = static_cast<int>(pre.clipped1);
        rec.clipped2 = static_cast<int>(pre.clipped2);
        Fisher2x2 info = fisher_matrix_numeric(
            cfg.spec.which, pre.theta1, pre.theta2, cfg.model, cfg.fisher_T,
            cfg.sim.dt, mix_seed(rec.seed, 0xF15EDULL));
        if (!info.positive_definite)
            info = fisher_matrix_numeric(cfg.spec.which, pre.theta1,
                                         pre.theta2, cfg.model,
                                         2.0 * cfg.fisher_T, cfg.sim.dt,
                                         mix_seed(rec.seed, 0xF15EEULL));
        if (!info.positive_definite)
            throw std::runtime_error("numeric information not positive definite");
        const EstimatorTrajectory est =
            one_step_vector(path, pre, cfg.spec, cfg.model, cfg.tau_grid,
                            info.info, cfg.est_opts);
        rec.theta_star = est.theta1;
        rec.theta_star2 = est.theta2;
    } else if (cfg.estimator == "twostep") {
        const EstimatorTrajectory est = two_step_process(
            path, cfg.spec, cfg.model, cfg.tau_grid, cfg.est_opts);
        rec.theta_bar = est.prelim.theta1;
        rec.clipped1 = static_cast<int>(est.prelim.clipped1);
        rec.theta_star = est.theta1;
    } else if (cfg.estimator == "adaptive") {
        const PrelimResult pre = prelim_1d(path, cfg.spec, cfg.model);
        rec.theta_bar = pre.theta1;
        rec.clipped1 = static_cast<int>(pre.clipped1);
        const AdaptiveTrajectory adm = adaptive_system(
            path, pre.theta1, cfg.spec, cfg.model, cfg.adaptive_opts);
        rec.theta_star.reserve(cfg.tau_grid.size());
        for (double tau : cfg.tau_grid) {
            const long k = std::min(
                path.n_steps,
                static_cast<long>(std::floor(tau * path.horizon() / path.dt +
                                             1e-9)));
            rec.theta_star.push_back(
                adm.theta_star.at(static_cast<std::size_t>(k - adm.k_start)));
        }
    } else {
        const PrelimResult pre = prelim_1d(path, cfg.spec, cfg.model);
        rec.theta_bar = pre.theta1;
        rec.clipped1 = static_cast<int>(pre.clipped1);
        if (cfg.estimator == "onestep") {
            const EstimatorTrajectory est = one_step_process(
                path, pre, cfg.spec, cfg.model, cfg.tau_grid, cfg.est_opts);
            rec.theta_star = est.theta1;
        }
    }
    est_sec = std::chrono::duration<double>(clock::now() - t0).count();

    if (cfg.with_grid_mle) {
        const auto g0 = clock::now();
        rec.grid_estimate =
            grid_mle(path, cfg.spec, cfg.model, cfg.grid_size).theta_hat;
        rec.has_grid = true;
        grid_sec = std::chrono::duration<double>(clock::now() - g0).count();
    }
}

void compute_aggregates(MCReport& rep) {
    const std::size_t nt = rep.tau_grid.size();
    rep.err_mean.assign(nt, 0.0);
    rep.err_var.assign(nt, 0.0);
    rep.err_skew.assign(nt, 0.0);
    if (rep.estimator == "prelim") return;
    for (std::size_t i = 0; i < nt; ++i) {
        const std::vector<double> e = rep.scaled_errors(i);
        if (e.size() >= 2) {
            rep.err_mean[i] = mean(e);
            rep.err_var[i] = variance(e);
            rep.err_skew[i] = skewness(e);
        }
    }
}

double frobenius_rel_err(const std::vector<std::vector<double>>& cov,
                         const std::vector<double>& tau, bool min_kernel) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < tau.size(); ++i)
        for (std::size_t j = 0; j < tau.size(); ++j) {
            const double target = min_kernel
                                      ? std::min(tau[i], tau[j])
                                      : 1.0 / std::max(tau[i], tau[j]);
            num += (cov[i][j] - target) * (cov[i][j] - target);
            den += target * target;
        }
    return std::sqrt(num / den);
}

CheckResult eval_check(const CheckSpec& spec, const MCReport& rep,
                       const ExperimentConfig& cfg) {
    CheckResult res;
    res.name = spec.name;
    res.kind = spec.kind;
    res.tol = spec.tol;

    auto tau_index = [&](double tau) -> std::size_t {
        for (std::size_t i = 0; i < rep.tau_grid.size(); ++i)
            if (std::abs(rep.tau_grid[i] - tau) < 1e-9) return i;
        throw std::invalid_argument("check '" + spec.name +
                                    "': tau not on the experiment grid");
    };

    if (spec.kind == "var_ratio") {
        const auto e = rep.scaled_errors(tau_index(spec.tau));
        const double info = fisher(cfg.spec.which, rep.theta0_1, cfg.model);
        res.target = 1.0 / info;
        res.measured = variance(e);
        const double ratio = res.measured * info;
        res.passed = ratio >= 1.0 - spec.tol && ratio <= 1.0 + spec.tol;
        std::ostringstream os;
        os.precision(6);
        os << "ratio=" << ratio << " n=" << e.size();
        res.note = os.str();
    } else if (spec.kind == "ks_normal") {
        const auto e = rep.scaled_errors(tau_index(spec.tau));
        const double info = fisher(cfg.spec.which, rep.theta0_1, cfg.model);
        const NormalityCheck nc = normality_check(e, 1.0 / info);
        res.measured = nc.p_value;
        res.target = spec.p_min;
        res.passed = nc.p_value > spec.p_min;
        std::ostringstream os;
        os.precision(6);
        os << "ks=" << nc.ks_stat << " var_ratio=" << nc.var_ratio;
        res.note = os.str();
    } else if (spec.kind == "zeta_cov") {
        const TauCovariance tc =
            covariance_over_tau(rep, rep.theta0_1, spec.kappa);
        double worst = 0.0;
        for (std::size_t i = 0; i < tc.tau.size(); ++i)
            for (std::size_t j = 0; j < tc.tau.size(); ++j) {
                const double target = std::min(tc.tau[i], tc.tau[j]);
                worst = std::max(
                    worst, std::abs(tc.cov_scaled[i][j] - target) / target);
            }
        res.measured = worst;
        res.target = spec.tol;
        res.passed = worst <= spec.tol;
        res.note = "best kernel: " + tc.best_kernel;
    } else if (spec.kind == "mse_improvement") {
        double mse_pre = 0, mse_star = 0;
        long n = 0;
        const std::size_t last = rep.tau_grid.size() - 1;
        for (const auto& r : rep.records) {
            if (r.excluded) continue;
            const double e0 = r.theta_bar - rep.theta0_1;
            const double e1 = r.theta_star[last] - rep.theta0_1;
            mse_pre += e0 * e0;
            mse_star += e1 * e1;
            ++n;
        }
        mse_pre /= static_cast<double>(n);
        mse_star /= static_cast<double>(n);
        res.measured = mse_star / mse_pre;
        res.target = 1.0;
        res.passed = mse_star < mse_pre;
        std::ostringstream os;
        os.precision(6);
        os << "mse_star=" << mse_star << " mse_prelim=" << mse_pre;
        res.note = os.str();
    } else if (spec.kind == "vector_cov") {
        const std::size_t last = rep.tau_grid.size() - 1;
        std::vector<double> e1, e2;
        for (const auto& r : rep.records) {
            if (r.excluded) continue;
            e1.push_back(std::sqrt(rep.T) * (r.theta_star[last] - rep.theta0_1));
            e2.push_back(std::sqrt(rep.T) *
                         (r.theta_star2[last] - rep.theta0_2));
        }
        const double m1 = mean(e1), m2 = mean(e2);
        double c11 = 0, c12 = 0, c22 = 0;
        for (std::size_t i = 0; i < e1.size(); ++i) {
            c11 += (e1[i] - m1) * (e1[i] - m1);
            c12 += (e1[i] - m1) * (e2[i] - m2);
            c22 += (e2[i] - m2) * (e2[i] - m2);
        }
        const double n1 = static_cast<double>(e1.size()) - 1.0;
        c11 /= n1;
        c12 /= n1;
        c22 /= n1;
        const Fisher2x2 info = fisher_matrix_numeric(
            cfg.spec.which, rep.theta0_1, rep.theta0_2, cfg.model, 1e5,
            cfg.sim.dt, mix_seed(cfg.master_seed, 0x7A26E7ULL));
        if (!info.positive_definite)
            throw std::runtime_error("vector_cov: reference information not PD");
        const Mat2 target = info.info.inverse();
        const double num =
            std::sqrt((c11 - target.a11) * (c11 - target.a11) +
                      2.0 * (c12 - target.a12) * (c12 - target.a12) +
                      (c22 - target.a22) * (c22 - target.a22));
        const double den = std::sqrt(target.a11 * target.a11 +
                                     2.0 * target.a12 * target.a12 +
                                     target.a22 * target.a22);
        res.measured = num / den;
        res.target = spec.tol;
        res.passed = res.measured <= spec.tol;
        std::ostringstream os;
        os.precision(6);
        os << "cov=[" << c11 << "," << c12 << "," << c22 << "] target=["
           << target.a11 << "," << target.a12 << "," << target.a22 << "]";
        res.note = os.str();
    } else {
        throw std::invalid_argument("unknown check kind '" + spec.kind + "'");
    }
    return res;
}

}  // namespace

MCReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto wall0 = std::chrono::steady_clock::now();

    MCReport rep;
    rep.which = cfg.spec.which;
    rep.model = cfg.model;
    rep.theta0_1 = true_value(cfg.model, cfg.spec.which, 0);
    rep.theta0_2 =
        is_pair(cfg.spec.which) ? true_value(cfg.model, cfg.spec.which, 1) : 0;
    rep.T = cfg.sim.horizon_T;
    rep.delta = cfg.spec.delta;
    rep.dt = cfg.sim.dt;
    rep.tau_grid = cfg.tau_grid;
    rep.master_seed = cfg.master_seed;
    rep.reps = cfg.reps;
    rep.estimator = cfg.estimator;
    rep.records.resize(cfg.reps);

    const int n_workers =
        cfg.workers > 0 ? cfg.workers
                        : static_cast<int>(
                              std::max(1u, std::thread::hardware_concurrency()));
    std::atomic<long> next{0};
    std::vector<double> est_sec(cfg.reps, 0.0), grid_sec(cfg.reps, 0.0);
    std::mutex err_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        for (;;) {
            const long i = next.fetch_add(1);
            if (i >= cfg.reps) break;
            try {
                run_one_rep(cfg, i, rep.records[i], est_sec[i], grid_sec[i]);
            } catch (const std::runtime_error& e) {
                // numerical failure of a single replication: exclude, count
                rep.records[i].rep = i;
                rep.records[i].seed =
                    mix_seed(cfg.master_seed, static_cast<std::uint64_t>(i));
                rep.records[i].excluded = true;
                rep.records[i].error = e.what();
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    {
        std::vector<std::thread> pool;
        const long spawn = std::min<long>(n_workers, cfg.reps);
        pool.reserve(spawn);
        for (long w = 0; w < spawn; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    for (long i = 0; i < cfg.reps; ++i) {
        if (rep.records[i].excluded) ++rep.excluded;
        rep.estimator_seconds += est_sec[i];
        rep.grid_seconds += grid_sec[i];
    }
    rep.failed = static_cast<double>(rep.excluded) >
                 0.01 * static_cast<double>(cfg.reps);

    compute_aggregates(rep);
    for (const auto& c : cfg.checks)
        rep.checks.push_back(eval_check(c, rep, cfg));

    rep.wall_clock_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0)
            .count();
    return rep;
}

NormalityCheck normality_check(std::span<const double> samples,
                               double target_variance) {
    NormalityCheck out;
    const KsResult ks = ks_test_normal(samples, target_variance);
    out.ks_stat = ks.stat;
    out.p_value = ks.p_value;
    out.var_ratio = variance(samples) / target_variance;
    return out;
}

TauCovariance covariance_over_tau(const MCReport& report, double theta0,
                                  double kappa) {
    const double tau_min = std::pow(report.T, report.delta - 1.0);
    if (!(kappa > tau_min))
        throw std::invalid_argument(
            "covariance_over_tau: kappa must exceed T^(delta-1)");

    TauCovariance tc;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < report.tau_grid.size(); ++i)
        if (report.tau_grid[i] + 1e-12 >= kappa) {
            keep.push_back(i);
            tc.tau.push_back(report.tau_grid[i]);
        }
    if (tc.tau.empty())
        throw std::invalid_argument("covariance_over_tau: empty tau window");

    const double scale =
        std::sqrt(report.T * fisher(report.which, theta0, report.model));
    std::vector<std::vector<double>> z(keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j)
        for (const auto& r : report.records) {
            if (r.excluded) continue;
            z[j].push_back(scale * (r.theta_star[keep[j]] - theta0));
        }
    const std::size_t n = z.front().size();
    if (n < 2) throw std::invalid_argument("covariance_over_tau: too few reps");

    const std::size_t m = keep.size();
    tc.cov_plain.assign(m, std::vector<double>(m, 0.0));
    tc.cov_scaled.assign(m, std::vector<double>(m, 0.0));
    std::vector<double> mu(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) mu[j] = mean(z[j]);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double c = 0.0;
            for (std::size_t r = 0; r < n; ++r)
                c += (z[i][r] - mu[i]) * (z[j][r] - mu[j]);
            c /= static_cast<double>(n - 1);
            tc.cov_plain[i][j] = c;
            tc.cov_scaled[i][j] = c * tc.tau[i] * tc.tau[j];
        }

    tc.err_scaled_vs_min = frobenius_rel_err(tc.cov_scaled, tc.tau, true);
    tc.err_plain_vs_min = frobenius_rel_err(tc.cov_plain, tc.tau, true);
    tc.err_plain_vs_invmax = frobenius_rel_err(tc.cov_plain, tc.tau, false);
    const double best = std::min({tc.err_scaled_vs_min, tc.err_plain_vs_min,
                                  tc.err_plain_vs_invmax});
    if (best == tc.err_scaled_vs_min)
        tc.best_kernel = "tau-scaled process is the Wiener one: "
                         "Cov(tau1 z1, tau2 z2) = min(tau1, tau2)";
    else if (best == tc.err_plain_vs_invmax)
        tc.best_kernel = "Cov(z1, z2) = 1/max(tau1, tau2)";
    else
        tc.best_kernel = "Cov(z1, z2) = min(tau1, tau2)";
    return tc;
}

namespace {

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json record_to_json(const RepRecord& r) {
    json j;
    j["rep"] = r.rep;
    j["seed"] = r.seed;
    j["excluded"] = r.excluded;
    if (r.excluded) j["error"] = r.error;
    j["theta_bar"] = r.theta_bar;
    j["theta_bar2"] = r.theta_bar2;
    j["clipped1"] = r.clipped1;
    j["clipped2"] = r.clipped2;
    j["theta_star"] = r.theta_star;
    j["theta_star2"] = r.theta_star2;
    if (r.has_grid) j["grid_estimate"] = r.grid_estimate;
    return j;
}

RepRecord record_from_json(const json& j) {
    RepRecord r;
    r.rep = j.at("rep").get<long>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.excluded = j.at("excluded").get<bool>();
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
    r.theta_bar = j.at("theta_bar").get<double>();
    r.theta_bar2 = j.at("theta_bar2").get<double>();
    r.clipped1 = j.at("clipped1").get<int>();
    r.clipped2 = j.at("clipped2").get<int>();
    r.theta_star = j.at("theta_star").get<std::vector<double>>();
    r.theta_star2 = j.at("theta_star2").get<std::vector<double>>();
    if (j.contains("grid_estimate")) {
        r.grid_estimate = j.at("grid_estimate").get<double>();
        r.has_grid = true;
    }
    return r;
}

}  // namespace

std::string report_to_json(const MCReport& report) {
    json j;
    j["case"] = to_string(report.which);
    j["model"] = {{"a", report.model.a},
                  {"f", report.model.f},
                  {"b", report.model.b},
                  {"sigma", report.model.sigma},
                  {"d2", report.model.d2}};
    j["theta0"] = {report.theta0_1, report.theta0_2};
    j["T"] = report.T;
    j["delta"] = report.delta;
    j["dt"] = report.dt;
    j["tau_grid"] = report.tau_grid;
    j["master_seed"] = report.master_seed;
    j["reps"] = report.reps;
    j["estimator"] = report.estimator;
    j["excluded"] = report.excluded;
    j["failed"] = report.failed;
    j["err_mean"] = report.err_mean;
    j["err_var"] = report.err_var;
    j["err_skew"] = report.err_skew;
    j["wall_clock_sec"] = report.wall_clock_sec;
    j["estimator_seconds"] = report.estimator_seconds;
    j["grid_seconds"] = report.grid_seconds;
    json checks = json::array();
    for (const auto& c : report.checks)
        checks.push_back({{"name", c.name},
                          {"kind", c.kind},
                          {"passed", c.passed},
                          {"measured", c.measured},
                          {"target", c.target},
                          {"tol", c.tol},
                          {"note", c.note}});
    j["checks"] = checks;
    json recs = json::array();
    for (const auto& r : report.records) recs.push_back(record_to_json(r));
    j["records"] = recs;
    return j.dump(1);
}

MCReport report_from_json(const std::string& text, bool verify_aggregates) {
    const json j = json::parse(text);
    MCReport rep;
    rep.which = unknown_from_string(j.at("case").get<std::string>());
    const auto& m = j.at("model");
    rep.model.a = m.at("a").get<double>();
    rep.model.f = m.at("f").get<double>();
    rep.model.b = m.at("b").get<double>();
    rep.model.sigma = m.at("sigma").get<double>();
    rep.model.d2 = m.at("d2").get<double>();
    rep.theta0_1 = j.at("theta0")[0].get<double>();
    rep.theta0_2 = j.at("theta0")[1].get<double>();
    rep.T = j.at("T").get<double>();
    rep.delta = j.at("delta").get<double>();
    rep.dt = j.at("dt").get<double>();
    rep.tau_grid = j.at("tau_grid").get<std::vector<double>>();
    rep.master_seed = j.at("master_seed").get<std::uint64_t>();
    rep.reps = j.at("reps").get<long>();
    rep.estimator = j.at("estimator").get<std::string>();
    rep.excluded = j.at("excluded").get<long>();
    rep.failed = j.at("failed").get<bool>();
    rep.err_mean = j.at("err_mean").get<std::vector<double>>();
    rep.err_var = j.at("err_var").get<std::vector<double>>();
    rep.err_skew = j.at("err_skew").get<std::vector<double>>();
    rep.wall_clock_sec = j.at("wall_clock_sec").get<double>();
    rep.estimator_seconds = j.at("estimator_seconds").get<double>();
    rep.grid_seconds = j.at("grid_seconds").get<double>();
    for (const auto& c : j.at("checks")) {
        CheckResult cr;
        cr.name = c.at("name").get<std::string>();
        cr.kind = c.at("kind").get<std::string>();
        cr.passed = c.at("passed").get<bool>();
        cr.measured = c.at("measured").get<double>();
        cr.target = c.at("target").get<double>();
        cr.tol = c.at("tol").get<double>();
        cr.note = c.at("note").get<std::string>();
        rep.checks.push_back(cr);
    }
    for (const auto& r : j.at("records"))
        rep.records.push_back(record_from_json(r));

    if (verify_aggregates) {
        MCReport fresh = rep;
        compute_aggregates(fresh);
        auto close = [](const std::vector<double>& a,
                        const std::vector<double>& b) {
            if (a.size() != b.size()) return false;
            for (std::size_t i = 0; i < a.size(); ++i)
                if (std::abs(a[i] - b[i]) >
                    1e-9 * std::max(1.0, std::abs(b[i])))
                    return false;
            return true;
        };
        if (!close(fresh.err_mean, rep.err_mean) ||
            !close(fresh.err_var, rep.err_var) ||
            !close(fresh.err_skew, rep.err_skew))
            throw std::runtime_error(
                "report_from_json: stored aggregates do not match records");
    }
    return rep;
}

std::string rep_records_csv(const MCReport& report) {
    std::string out = "rep,seed,excluded,theta_bar,theta_bar2,clipped1,clipped2";
    for (double tau : report.tau_grid) out += ",theta_star@" + g17(tau);
    if (!report.records.empty() && !report.records.front().theta_star2.empty())
        for (double tau : report.tau_grid) out += ",theta_star2@" + g17(tau);
    if (!report.records.empty() && report.records.front().has_grid)
        out += ",grid_mle";
    out += "\n";
    for (const auto& r : report.records) {
        out += std::to_string(r.rep) + "," + std::to_string(r.seed) + "," +
               (r.excluded ? "1" : "0") + "," + g17(r.theta_bar) + "," +
               g17(r.theta_bar2) + "," + std::to_string(r.clipped1) + "," +
               std::to_string(r.clipped2);
        for (std::size_t i = 0; i < report.tau_grid.size(); ++i)
            out += "," + (i < r.theta_star.size() ? g17(r.theta_star[i])
                                                  : std::string("nan"));
        if (!r.theta_star2.empty() || (!report.records.empty() &&
                                       !report.records.front().theta_star2.empty()))
            for (std::size_t i = 0; i < report.tau_grid.size(); ++i)
                out += "," + (i < r.theta_star2.size() ? g17(r.theta_star2[i])
                                                       : std::string("nan"));
        if (r.has_grid) out += "," + g17(r.grid_estimate);
        out += "\n";
    }
    return out;
}

std::string variance_profile_csv(const MCReport& report) {
    std::string out = "tau,n,var_scaled_err,target_var\n";
    const double info = fisher(report.which, report.theta0_1, report.model);
    for (std::size_t i = 0; i < report.tau_grid.size(); ++i) {
        const auto e = report.scaled_errors(i);
        out += g17(report.tau_grid[i]) + "," + std::to_string(e.size()) + "," +
               g17(e.size() >= 2 ? variance(e) : 0.0) + "," + g17(1.0 / info) +
               "\n";
    }
    return out;
}

double normal_quantile(double p) {
    if (!(p > 0 && p < 1))
        throw std::invalid_argument("normal_quantile: p in (0,1)");
    double lo = -10, hi = 10;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (normal_cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::string qq_csv(const MCReport& report) {
    const std::size_t last = report.tau_grid.size() - 1;
    std::vector<double> e = report.scaled_errors(last);
    const double info = fisher(report.which, report.theta0_1, report.model);
    const double sd = std::sqrt(1.0 / info);
    std::sort(e.begin(), e.end());
    std::string out = "theoretical_quantile,sample_quantile\n";
    const std::size_t n = e.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double q = normal_quantile((static_cast<double>(i) + 0.5) /
                                         static_cast<double>(n));
        out += g17(q) + "," + g17(e[i] / sd) + "\n";
    }
    return out;
}

}  // namespace ouest
