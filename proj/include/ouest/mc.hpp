#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ouest/estimators.hpp"
#include "ouest/filter.hpp"
#include "ouest/model.hpp"
#include "ouest/sim.hpp"

namespace ouest {

// Named assertion evaluated on the finished experiment.
struct CheckSpec {
    std::string name;
    std::string kind;  // var_ratio | ks_normal | zeta_cov | mse_improvement |
                       // vector_cov
    double tau = 1.0;
    double tol = 0.15;
    double p_min = 0.01;
    double kappa = 0.2;
};

struct ExperimentConfig {
    SystemParams model;  // true coefficients, including the unknown's truth
    ParamSpec spec;
    SimConfig sim;  // per-replication template; the seed field is ignored
    long reps = 100;
    int workers = 0;  // 0: hardware concurrency
    std::uint64_t master_seed = 1;
    std::vector<double> tau_grid{1.0};
    std::string estimator = "onestep";  // onestep | twostep | vector |
                                        // adaptive | prelim
    bool with_grid_mle = false;
    int grid_size = 50;
    EstimatorOpts est_opts;
    AdaptiveOpts adaptive_opts;
    double fisher_T = 2e4;  // aux horizon for the per-rep numeric information
    std::vector<CheckSpec> checks;

    void validate() const;
};

struct RepRecord {
    long rep = 0;
    std::uint64_t seed = 0;
    bool excluded = false;
    std::string error;
    double theta_bar = 0;
    double theta_bar2 = 0;
    int clipped1 = 0, clipped2 = 0;  // ClipSide as int
    std::vector<double> theta_star;
    std::vector<double> theta_star2;
    double grid_estimate = 0;
    bool has_grid = false;
};

struct CheckResult {
    std::string name;
    std::string kind;
    bool passed = false;
    double measured = 0;
    double target = 0;
    double tol = 0;
    std::string note;
};

struct MCReport {
    // experiment echo
    Unknown which = Unknown::F;
    SystemParams model;
    double theta0_1 = 0, theta0_2 = 0;
    double T = 0, delta = 0, dt = 0;
    std::vector<double> tau_grid;
    std::uint64_t master_seed = 0;
    long reps = 0;
    std::string estimator;

    std::vector<RepRecord> records;
    long excluded = 0;
    bool failed = false;  // exclusion cap (1%) exceeded

    // per-tau aggregates of the scaled errors sqrt(tau T)(theta* - theta0)
    std::vector<double> err_mean, err_var, err_skew;

    double wall_clock_sec = 0;
    double estimator_seconds = 0;  // summed over replications
    double grid_seconds = 0;

    std::vector<CheckResult> checks;

    bool checks_passed() const;
    // scaled errors at one tau index, excluded reps skipped
    std::vector<double> scaled_errors(std::size_t tau_index,
                                      int coord = 0) const;
};

MCReport run_experiment(const ExperimentConfig& cfg);

struct NormalityCheck {
    double ks_stat = 0;
    double p_value = 0;
    double var_ratio = 0;
};

// KS statistic of the samples against N(0, target_variance) plus the sample
// to target variance ratio.
NormalityCheck normality_check(std::span<const double> samples,
                               double target_variance);

struct TauCovariance {
    std::vector<double> tau;
    std::vector<std::vector<double>> cov_scaled;  // Cov(tau_i z_i, tau_j z_j)
    std::vector<std::vector<double>> cov_plain;   // Cov(z_i, z_j)
    double err_scaled_vs_min = 0;   // tau-scaled process against min(t1,t2)
    double err_plain_vs_min = 0;    // plain process against min(t1,t2)
    double err_plain_vs_invmax = 0; // plain process against 1/max(t1,t2)
    std::string best_kernel;
};

// Empirical covariance of the rescaled error process over the tau grid
// restricted to tau >= kappa, with the candidate kernels fitted.
TauCovariance covariance_over_tau(const MCReport& report, double theta0,
                                  double kappa);

// Persistence.  Loading verifies that the stored aggregates match the
// per-replication records.
std::string report_to_json(const MCReport& report);
MCReport report_from_json(const std::string& text,
                          bool verify_aggregates = true);

// Byte-stable per-replication CSV (independent of worker count).
std::string rep_records_csv(const MCReport& report);
// Plot-ready data: per-tau empirical variance of the scaled errors and
// QQ data at the last tau.
std::string variance_profile_csv(const MCReport& report);
std::string qq_csv(const MCReport& report);

double normal_quantile(double p);

}  // namespace ouest
