// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failing criteria.  Every tolerance is pinned here.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "ouest/estimators.hpp"
#include "ouest/filter.hpp"
#include "ouest/mc.hpp"
#include "ouest/model.hpp"
#include "ouest/oracle.hpp"
#include "ouest/prelim.hpp"
#include "ouest/rng.hpp"
#include "ouest/sim.hpp"
#include "ouest/stats.hpp"

using namespace ouest;

namespace {

int failures = 0;

void report(int idx, const std::string& what, bool pass,
            const std::string& detail) {
    std::printf("[%s] %2d. %s  (%s)\n", pass ? "PASS" : "FAIL", idx,
                what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

SystemParams unit_model(Unknown which, double theta, bool matched_d2) {
    SystemParams p = with_unknown(SystemParams{}, which, theta);
    if (matched_d2) {
        const double r = std::hypot(p.f, p.a * p.b / p.sigma);
        p.d2 = p.b * p.b / (r + p.f);  // gamma stays at its fixed point
    } else {
        p.d2 = p.b * p.b / (2.0 * p.f);  // stationary hidden state
    }
    return p;
}

// ---------------------------------------------------------------------------

void criterion_1_riccati() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0;
    for (double theta : {0.5, 0.8, 1.0, 1.5, 2.0}) {
        SystemParams p{1.0, 1.0, 1.0, 1.0, 0.0};
        const double gs = gamma_stationary(Unknown::F, theta, p).value;
        for (double d2 : {0.0, 0.9, gs}) {
            p.d2 = d2;
            std::vector<double> times;
            for (int i = 0; i <= 100; ++i) times.push_back(0.1 * i);
            const auto ode = riccati_ode(theta, d2, 10.0, p, times);
            for (std::size_t i = 0; i < times.size(); ++i)
                worst = std::max(worst, std::abs(ode[i] - gamma_transient(
                                                              theta, times[i], p)));
        }
    }
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    report(1, "Riccati closed form vs adaptive ODE integration",
           worst < 1e-8 && sec < 1.0,
           fmt("max abs err %.3g, %.2f s", worst, sec));
}

void criterion_2_fisher() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst_fb = 0;
    for (Unknown which : {Unknown::F, Unknown::B}) {
        for (int i = 0; i < 10; ++i) {
            const double theta = 0.4 + 0.2 * i;
            const SystemParams p{1.0, 1.0, 1.0, 1.0, 0.0};
            const double closed = fisher(which, theta, p);
            worst_fb = std::max(
                worst_fb,
                std::abs(closed - lyapunov_fisher_oracle(which, theta, p)) /
                    closed);
        }
    }
    const SystemParams p{1.0, 1.0, 1.0, 1.0, 0.0};
    const double closed_a = fisher(Unknown::A, 1.0, p);
    const double mc_a = fisher_mc_oracle(Unknown::A, 1.0, p, 1e5, 0.005, 424243);
    const double rel_a = std::abs(closed_a - mc_a) / closed_a;
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    report(2, "Fisher information vs stationary-covariance and MC oracles",
           worst_fb < 1e-8 && rel_a < 0.02 && sec < 60.0,
           fmt("F/B closed-vs-Lyapunov %.2e; A closed %.6f vs MC %.6f "
               "(rel %.3f); %.1f s",
               worst_fb, closed_a, mc_a, rel_a, sec));
}

void criterion_3_sigma2() {
    const auto t0 = std::chrono::steady_clock::now();
    const int reps = 200;

    // degenerate model: the estimator is exact up to the MC tolerance
    std::vector<double> est0(reps);
    for (int i = 0; i < reps; ++i) {
        SystemParams p{1.0, 1.0, 0.0, 1.0, 0.0};
        SimConfig cfg;
        cfg.dt = 1e-3;
        cfg.horizon_T = 100.0;
        cfg.seed = mix_seed(301, i);
        est0[i] = sigma2_hat(simulate(p, cfg));
    }
    const double se0 = std::sqrt(variance(est0) / reps);
    const double gap0 = std::abs(mean(est0) - 1.0);

    // full model: bias a^2 b^2 dt / (2 f)
    std::vector<double> est1(reps);
    SystemParams p = unit_model(Unknown::F, 1.0, false);
    for (int i = 0; i < reps; ++i) {
        SimConfig cfg;
        cfg.dt = 1e-3;
        cfg.horizon_T = 100.0;
        cfg.seed = mix_seed(302, i);
        est1[i] = sigma2_hat(simulate(p, cfg));
    }
    const double bias = p.a * p.a * p.b * p.b * 1e-3 / (2.0 * p.f);
    const double se1 = std::sqrt(variance(est1) / reps);
    const double gap1 = std::abs(mean(est1) - 1.0 - bias);

    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    report(3, "sigma^2 recovery from quadratic variation",
           gap0 < 3.0 * se0 && gap1 < 3.0 * se1 && sec < 60.0,
           fmt("b=0: |err| %.2e vs 3SE %.2e; full: |err-bias| %.2e vs 3SE "
               "%.2e; %.1f s",
               gap0, 3.0 * se0, gap1, 3.0 * se1, sec));
}

void criterion_4_prelim_rate() {
    const auto t0 = std::chrono::steady_clock::now();
    ParamSpec spec;
    spec.which = Unknown::F;
    spec.alpha = 0.5;
    spec.beta = 2.0;
    spec.delta = 0.6;
    const int reps = 500;
    double mse[3] = {0, 0, 0};
    const long Ks[3] = {100, 400, 1600};
    for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < reps; ++i) {
            SystemParams p = unit_model(Unknown::F, 1.0, false);
            SimConfig cfg;
            cfg.dt = 1.0;
            cfg.horizon_T = static_cast<double>(Ks[j]);
            cfg.seed = mix_seed(400 + j, i);
            const SamplePath path = simulate(p, cfg);
            const double e =
                prelim_from_stat(stat_S(path, Ks[j]), Ks[j], spec, p).theta1 -
                1.0;
            mse[j] += e * e;
        }
        mse[j] /= reps;
    }
    const double ratio = mse[2] / mse[1];
    double worst_bound = 0;
    for (int j = 0; j < 3; ++j)
        worst_bound = std::max(worst_bound, mse[j] * Ks[j]);
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    report(4, "preliminary estimator mean-square rate C/K",
           ratio >= 1.0 / 6.0 && ratio <= 2.0 / 3.0 && worst_bound < 40.0 &&
               sec < 300.0,
           fmt("K*MSE = {%.2f, %.2f, %.2f}; MSE(1600)/MSE(400) = %.3f; %.1f s",
               mse[0] * 100, mse[1] * 400, mse[2] * 1600, ratio, sec));
}

MCReport theorem_run(Unknown which, bool norm_t, std::uint64_t seed,
                     const std::vector<double>& taus, int reps,
                     const char* estimator = "onestep") {
    ExperimentConfig cfg;
    cfg.model = unit_model(which, 1.0, true);
    cfg.spec.which = which;
    cfg.spec.alpha = 0.5;
    cfg.spec.beta = 2.0;
    cfg.spec.delta = 0.6;
    cfg.sim.dt = 0.01;
    cfg.sim.horizon_T = 1000.0;
    cfg.reps = reps;
    cfg.master_seed = seed;
    cfg.tau_grid = taus;
    cfg.estimator = estimator;
    cfg.est_opts.norm_from_learning_end = !norm_t;
    cfg.adaptive_opts.norm_from_learning_end = !norm_t;
    return run_experiment(cfg);
}

MCReport case_f_report;  // shared by criteria 5 and 7

void criterion_5_normality() {
    const auto t0 = std::chrono::steady_clock::now();
    bool all = true;
    std::string detail;
    // the plain-t normalization for the cases stated with it; the centred one
    // for the remaining case
    case_f_report = theorem_run(Unknown::F, true, 501, {0.25, 0.5, 1.0}, 1000);
    const MCReport rb = theorem_run(Unknown::B, false, 502, {1.0}, 1000);
    const MCReport ra = theorem_run(Unknown::A, true, 503, {1.0}, 1000);
    const MCReport* reps[3] = {&case_f_report, &rb, &ra};
    const char* names[3] = {"F", "B", "A"};
    for (int c = 0; c < 3; ++c) {
        const MCReport& r = *reps[c];
        const std::size_t last = r.tau_grid.size() - 1;
        const std::vector<double> e = r.scaled_errors(last);
        const double info = fisher(r.which, 1.0, r.model);
        const NormalityCheck nc = normality_check(e, 1.0 / info);
        const bool ok = nc.p_value > 0.01 && nc.var_ratio >= 0.85 &&
                        nc.var_ratio <= 1.15 && !r.failed;
        all = all && ok;
        detail += fmt("%s: p=%.3f vr=%.3f excl=%ld; ", names[c], nc.p_value,
                      nc.var_ratio, r.excluded);
    }
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    detail += fmt("%.0f s", sec);
    report(5, "one-step estimator normality and variance, cases F/B/A",
           all && sec < 900.0, detail);
}

void criterion_6_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    cfg.model = unit_model(Unknown::F, 1.0, true);
    cfg.spec.which = Unknown::F;
    cfg.spec.alpha = 0.5;
    cfg.spec.beta = 2.0;
    cfg.spec.delta = 0.6;
    cfg.sim.dt = 0.01;
    cfg.sim.horizon_T = 1000.0;
    cfg.reps = 200;
    cfg.master_seed = 601;
    cfg.tau_grid = {1.0};
    cfg.with_grid_mle = true;
    cfg.grid_size = 50;
    const MCReport r = run_experiment(cfg);

    std::vector<double> e_star, e_grid;
    for (const auto& rec : r.records) {
        if (rec.excluded) continue;
        e_star.push_back(rec.theta_star[0] - 1.0);
        e_grid.push_back(rec.grid_estimate - 1.0);
    }
    const double ms = mean(e_star), mg = mean(e_grid);
    double num = 0, vs = 0, vg = 0;
    for (std::size_t i = 0; i < e_star.size(); ++i) {
        num += (e_star[i] - ms) * (e_grid[i] - mg);
        vs += (e_star[i] - ms) * (e_star[i] - ms);
        vg += (e_grid[i] - mg) * (e_grid[i] - mg);
    }
    const double corr = num / std::sqrt(vs * vg);
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    report(6, "one-step vs grid-likelihood reference: correlation and cost",
           corr >= 0.9 && r.estimator_seconds < r.grid_seconds,
           fmt("corr %.3f; one-step %.1f s vs 50-point grid %.1f s "
               "(summed over reps); %.0f s",
               corr, r.estimator_seconds, r.grid_seconds, sec));
}

void criterion_7_zeta() {
    const TauCovariance tc = covariance_over_tau(case_f_report, 1.0, 0.2);
    double worst = 0;
    for (std::size_t i = 0; i < tc.tau.size(); ++i)
        for (std::size_t j = 0; j < tc.tau.size(); ++j) {
            const double target = std::min(tc.tau[i], tc.tau[j]);
            worst = std::max(worst,
                             std::abs(tc.cov_scaled[i][j] - target) / target);
        }
    report(7, "rescaled estimator process covariance over tau",
           worst <= 0.15,
           fmt("max rel dev from min(t1,t2): %.3f; data support: %s "
               "[fits: tau-scaled %.3f, plain-min %.3f, plain-1/max %.3f]",
               worst, tc.best_kernel.c_str(), tc.err_scaled_vs_min,
               tc.err_plain_vs_min, tc.err_plain_vs_invmax));
}

void criterion_8_pair() {
    const auto t0 = std::chrono::steady_clock::now();
    auto run_fb = [&](double T, std::uint64_t seed) {
        ExperimentConfig cfg;
        cfg.model = unit_model(Unknown::FB, 1.0, false);
        cfg.model.b = 1.0;
        cfg.spec.which = Unknown::FB;
        cfg.spec.alpha = 0.25;
        cfg.spec.beta = 4.0;
        cfg.spec.alpha2 = 0.25;
        cfg.spec.beta2 = 4.0;
        cfg.spec.delta = 0.6;
        cfg.sim.dt = 0.01;
        cfg.sim.horizon_T = T;
        cfg.reps = 300;
        cfg.master_seed = seed;
        cfg.tau_grid = {1.0};
        cfg.estimator = "vector";
        cfg.fisher_T = 1e4;
        if (T == 5000.0)
            cfg.checks.push_back({"cov", "vector_cov", 1.0, 0.25, 0.01, 0.2});
        return run_experiment(cfg);
    };
    const MCReport r2 = run_fb(2000.0, 801);
    const MCReport r5 = run_fb(5000.0, 802);
    const MCReport r10 = run_fb(10000.0, 803);

    auto med_err = [](const MCReport& r, int coord) {
        std::vector<double> e;
        for (const auto& rec : r.records) {
            if (rec.excluded) continue;
            const double v = coord == 0 ? rec.theta_star[0] - r.theta0_1
                                        : rec.theta_star2[0] - r.theta0_2;
            e.push_back(std::abs(v));
        }
        return median(e);
    };
    const double f2 = med_err(r2, 0), f5 = med_err(r5, 0), f10 = med_err(r10, 0);
    const double b2 = med_err(r2, 1), b5 = med_err(r5, 1), b10 = med_err(r10, 1);
    const bool consistent = f2 > f5 && f5 > f10 && b2 > b5 && b5 > b10;
    const bool cov_ok = !r5.checks.empty() && r5.checks[0].passed;
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    report(8, "two-parameter pipeline (f, b): consistency and covariance",
           consistent && cov_ok && !r5.failed,
           fmt("median |err_f| {%.4f > %.4f > %.4f}, |err_b| {%.4f > %.4f > "
               "%.4f}; cov vs numeric info^-1: %.3f (tol 0.25); %.0f s",
               f2, f5, f10, b2, b5, b10,
               r5.checks.empty() ? -1.0 : r5.checks[0].measured, sec));
}

void criterion_9_adaptive() {
    const auto t0 = std::chrono::steady_clock::now();
    const MCReport r = theorem_run(Unknown::F, false, 901, {1.0}, 500,
                                   "adaptive");
    const std::vector<double> e = r.scaled_errors(0);
    const double info = fisher(Unknown::F, 1.0, r.model);
    const double ratio = variance(e) * info;
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    report(9, "adaptive recurrent estimation: terminal variance",
           ratio >= 0.75 && ratio <= 1.25 && !r.failed,
           fmt("T Var / (1/I) = %.3f (tol 25%%); excl=%ld; %.0f s", ratio,
               r.excluded, sec));
}

void criterion_10_determinism() {
    ExperimentConfig cfg;
    cfg.model = unit_model(Unknown::F, 1.0, true);
    cfg.spec.which = Unknown::F;
    cfg.spec.alpha = 0.5;
    cfg.spec.beta = 2.0;
    cfg.spec.delta = 0.6;
    cfg.sim.dt = 0.05;
    cfg.sim.horizon_T = 200.0;
    cfg.reps = 60;
    cfg.master_seed = 1001;
    cfg.tau_grid = {1.0};
    cfg.workers = 1;
    const std::string csv1 = rep_records_csv(run_experiment(cfg));
    cfg.workers = 4;
    const std::string csv4 = rep_records_csv(run_experiment(cfg));
    report(10, "replication records independent of the worker count",
           csv1 == csv4 && !csv1.empty(),
           fmt("%zu bytes, byte-identical: %s", csv1.size(),
               csv1 == csv4 ? "yes" : "no"));
}

}  // namespace

int main() {
    criterion_1_riccati();
    criterion_2_fisher();
    criterion_3_sigma2();
    criterion_4_prelim_rate();
    criterion_5_normality();
    criterion_6_equivalence();
    criterion_7_zeta();
    criterion_8_pair();
    criterion_9_adaptive();
    criterion_10_determinism();
    std::printf("%s: %d of 10 criteria failed\n",
                failures == 0 ? "OK" : "FAILURES", failures);
    return failures;
}
