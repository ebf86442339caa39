#pragma once

#include <vector>

#include "ouest/model.hpp"
#include "ouest/sim.hpp"

namespace ouest {

// Coefficients of the conditional-mean recursion
//
//   dm = -decay * m dt + gain * dX
//
// for one fixed parameter value, together with the derivatives of (decay,
// gain, obs_gain) with respect to the unknown coordinate(s).  The derivative
// recursions integrated by FilterStepper are the exact parameter derivatives
// of the discrete m recursion, so finite differences of m across theta
// reproduce mdot without an O(dt) mismatch.
struct FilterWiring {
    Unknown which = Unknown::F;
    int n_unknown = 1;
    double theta1 = 0, theta2 = 0;
    double sigma = 1;
    double f_eff = 1, b_eff = 1;  // state drift / state noise in force
    double obs_gain = 1;          // c in dX = c m dt + sigma dW
    double dobs[2] = {0, 0};
    double decay = 1;             // equals sqrt(f_eff^2 + c^2 b_eff^2/sigma^2)
    double gain = 0;
    double ddecay[2] = {0, 0};
    double dgain[2] = {0, 0};
    double d2decay = 0;           // second derivatives, scalar case F only
    double d2gain = 0;
    double gamma = 0;             // stationary filtering-error variance
    double dgamma = 0;

    // Score factor psi_j = d(c m)/dtheta_j / sigma^2.
    double score(double m, double mdot_j, int j) const {
        return (obs_gain * mdot_j + dobs[j] * m) / (sigma * sigma);
    }
    double innovation(double m, double dX, double dt) const {
        return dX - obs_gain * m * dt;
    }
};

FilterWiring make_wiring(Unknown which, double theta1, const SystemParams& p,
                         double theta2 = 0);

struct FilterOpts {
    bool with_mddot = false;       // second-derivative state (Unknown::F only)
    bool stationary_gamma = true;  // false: time-dependent Riccati gain, m only
    double m0 = 0.0;
    int n_deriv = -1;  // -1: one per unknown coordinate; 0 disables
};

// Streaming integrator of the stationary-gain filter recursions with exact
// exponential decay per step.
class FilterStepper {
  public:
    FilterStepper(const FilterWiring& w, double dt, const FilterOpts& opts);

    void step(double dX);

    double m() const { return m_; }
    double mdot(int j = 0) const { return md_[j]; }
    double mddot() const { return mdd_; }
    double time() const { return t_; }
    const FilterWiring& wiring() const { return w_; }

  private:
    FilterWiring w_;
    double dt_;
    int n_deriv_;
    bool with_mddot_;
    double E_, dE_[2], d2E_;
    double m_ = 0, md_[2] = {0, 0}, mdd_ = 0;
    double t_ = 0;
    long k_ = 0;
};

struct FilterTrajectory {
    Unknown which = Unknown::F;
    double theta1 = 0, theta2 = 0;
    double dt = 0;
    std::vector<double> m;
    std::vector<double> mdot;   // derivative in the first unknown coordinate
    std::vector<double> mdot2;  // second coordinate (pair cases)
    std::vector<double> mddot;  // optional second derivative (case F)
    std::vector<double> gamma;  // constant in the stationary regime
};

FilterTrajectory run_filter(const SamplePath& path, Unknown which,
                            double theta, const SystemParams& p,
                            const FilterOpts& opts = {}, double theta2 = 0);

// Adaptive Runge-Kutta integration of the filtering Riccati equation
//   dgamma/dt = -2 theta gamma - gamma^2 a^2/sigma^2 + b^2, gamma(0) = d2,
// sampled at the given times (relative tolerance 1e-10).  Serves as the
// reference for the closed-form gamma_transient.
std::vector<double> riccati_ode(double theta, double d2, double t_end,
                                const SystemParams& p,
                                const std::vector<double>& sample_times);

struct AdaptiveOpts {
    bool norm_from_learning_end = true;  // norm(t) = t - T^delta; else t
    bool paper_drift = false;  // literal recurrent drift -theta*/(t - T^delta)
    double guard_widths = 10.0;
};

// Joint trajectory of the recurrent estimator update and the adaptive filter
// whose gain tracks the running estimate.  Arrays cover grid indices
// [k_start, n_steps].
struct AdaptiveTrajectory {
    long k_start = 0;
    double dt = 0;
    double T_delta = 0;
    double prelim = 0;
    std::vector<double> theta_star;
    std::vector<double> m_adaptive;
    long clamp_count = 0;

    double theta_at_time(double t) const;
};

AdaptiveTrajectory adaptive_system(const SamplePath& path, double prelim,
                                   const ParamSpec& spec,
                                   const SystemParams& p,
                                   const AdaptiveOpts& opts = {});

// First grid index whose time is >= T^delta (start of the estimation pass).
long learning_end_index(double T, double delta, double dt);

// General transient Riccati solution for state drift fe, state noise be and
// observation gain c.
double gamma_transient_general(double fe, double be, double c, double sigma,
                               double d2, double t);

}  // namespace ouest
