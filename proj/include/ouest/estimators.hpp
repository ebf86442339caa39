#pragma once

#include <vector>

#include "ouest/filter.hpp"
#include "ouest/model.hpp"
#include "ouest/prelim.hpp"
#include "ouest/sim.hpp"

namespace ouest {

struct EstimatorOpts {
    // norm(t) = t - T^delta when true (the centred normalization), plain t
    // otherwise.  Both are asymptotically equivalent.
    bool norm_from_learning_end = true;
    // Internal override used by the two-step construction, whose first stage
    // runs with delta <= 1/2.
    bool allow_short_delta = false;
    // Nominal experiment horizon defining T^delta and the tau scale; 0 means
    // the path horizon.  Lets a path truncated at tau*T reproduce the
    // trajectory of the full experiment exactly.
    double nominal_T = 0;
};

// Estimator path over a grid of evaluation fractions tau in (T^(delta-1), 1];
// the value at tau depends on observations up to tau*T only.
struct EstimatorTrajectory {
    Unknown which = Unknown::F;
    double T = 0;
    double delta = 0;
    std::vector<double> tau;
    std::vector<double> theta1;
    std::vector<double> theta2;  // pair cases
    PrelimResult prelim;
    double fisher_scalar = 0;    // information frozen at the preliminary value
    Mat2 fisher_matrix;          // pair cases
    SystemParams params;

    double at(double tau_query, int coord = 0) const;
};

// One Newton-scoring correction of the preliminary estimator, accumulated
// cumulatively in time:
//   theta*(t) = theta_bar + [norm(t) I(theta_bar)]^-1
//               int_{T^delta}^t psi(theta_bar, s) [dX_s - c m(theta_bar, s) ds]
// computed in a single pass of the filter at theta_bar.
EstimatorTrajectory one_step_process(const SamplePath& path,
                                     const PrelimResult& prelim,
                                     const ParamSpec& spec,
                                     const SystemParams& p,
                                     const std::vector<double>& tau_grid,
                                     const EstimatorOpts& opts = {});

// Vector analogue for the pair cases, with the supplied 2x2 information
// matrix frozen at the preliminary value.
EstimatorTrajectory one_step_vector(const SamplePath& path,
                                    const PrelimResult& prelim,
                                    const ParamSpec& spec,
                                    const SystemParams& p,
                                    const std::vector<double>& tau_grid,
                                    const Mat2& fisher_at_prelim,
                                    const EstimatorOpts& opts = {});

// Second-stage correction integral evaluated at tau*T: score frozen at
// theta_score, innovation filter frozen at theta_filter, information at
// theta_filter.
double two_step_correction(const SamplePath& path, double theta_score,
                           double theta_filter, double tau,
                           const ParamSpec& spec, const SystemParams& p,
                           const EstimatorOpts& opts = {});

// Two-stage construction for short learning intervals, delta in (1/3, 1/2]:
// a first one-step pass followed by a re-centred correction whose innovation
// filter is frozen at the first-stage value per evaluation point.
EstimatorTrajectory two_step_process(const SamplePath& path,
                                     const ParamSpec& spec,
                                     const SystemParams& p,
                                     const std::vector<double>& tau_grid,
                                     const EstimatorOpts& opts = {});

struct GridMleResult {
    double theta_hat = 0;
    std::vector<double> thetas;
    std::vector<double> loglik;
};

// Reference estimator: log-likelihood on a uniform grid over [alpha, beta],
// one filter pass per grid point, argmax refined by one parabolic
// interpolation.  Ties resolve to the grid point nearest the midpoint.
GridMleResult grid_mle(const SamplePath& path, const ParamSpec& spec,
                       const SystemParams& p, int grid_size);

struct ZetaTrajectory {
    std::vector<double> tau;
    std::vector<double> zeta;
    double kappa = 0;
    double theta0 = 0;
};

// Rescaled estimation error zeta(tau) = sqrt(T I(theta0)) (theta*(tau) -
// theta0) restricted to tau >= kappa; requires kappa > T^(delta-1).
ZetaTrajectory zeta_trajectory(const EstimatorTrajectory& est, double theta0,
                               double kappa);

}  // namespace ouest
