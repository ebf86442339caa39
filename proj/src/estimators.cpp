#include "ouest/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ouest {

namespace {

struct Timing {
    double T;
    double T_delta;
    long k0;  // first grid index of the estimation pass
};

Timing timing_of(const SamplePath& path, const ParamSpec& spec,
                 const EstimatorOpts& opts) {
    Timing t;
    t.T = opts.nominal_T > 0 ? opts.nominal_T : path.horizon();
    t.T_delta = std::pow(t.T, spec.delta);
    t.k0 = learning_end_index(t.T, spec.delta, path.dt);
    if (t.k0 >= path.n_steps)
        throw std::invalid_argument("learning interval covers the whole path");
    return t;
}

// Evaluation indices for the tau grid: theta*(tau) uses observations up to
// tau*T, i.e. grid index floor(tau*T/dt).
std::vector<long> eval_indices(const SamplePath& path, const Timing& tm,
                               const std::vector<double>& tau_grid) {
    if (tau_grid.empty())
        throw std::invalid_argument("tau grid must be nonempty");
    std::vector<long> idx;
    idx.reserve(tau_grid.size());
    double prev = 0.0;
    for (double tau : tau_grid) {
        if (!(tau > prev))
            throw std::invalid_argument("tau grid must be strictly increasing");
        if (tau > 1.0 + 1e-12)
            throw std::invalid_argument("tau must be <= 1");
        const long k = static_cast<long>(
            std::floor(tau * tm.T / path.dt + 1e-6));
        if (k <= tm.k0)
            throw std::invalid_argument(
                "tau*T must lie beyond the learning interval T^delta");
        if (k > path.n_steps)
            throw std::invalid_argument("path too short for the tau grid");
        idx.push_back(k);
        prev = tau;
    }
    return idx;
}

double norm_at(double t, const Timing& tm, const EstimatorOpts& opts) {
    return opts.norm_from_learning_end ? t - tm.T_delta : t;
}

void check_delta_one_step(const ParamSpec& spec, const EstimatorOpts& opts) {
    if (opts.allow_short_delta) return;
    if (!(spec.delta > 0.5 && spec.delta < 1.0))
        throw std::invalid_argument(
            "one-step process requires delta in (1/2, 1)");
}

}  // namespace

double EstimatorTrajectory::at(double tau_query, int coord) const {
    for (std::size_t i = 0; i < tau.size(); ++i)
        if (std::abs(tau[i] - tau_query) < 1e-9)
            return coord == 0 ? theta1[i] : theta2[i];
    throw std::out_of_range("EstimatorTrajectory: tau not on the grid");
}

EstimatorTrajectory one_step_process(const SamplePath& path,
                                     const PrelimResult& prelim,
                                     const ParamSpec& spec,
                                     const SystemParams& p,
                                     const std::vector<double>& tau_grid,
                                     const EstimatorOpts& opts) {
    spec.validate();
    p.validate_estimation();
    check_delta_one_step(spec, opts);
    if (is_pair(spec.which))
        throw std::invalid_argument("one_step_process: scalar cases only");
    if (prelim.which != spec.which)
        throw std::invalid_argument("one_step_process: prelim case mismatch");
    const Timing tm = timing_of(path, spec, opts);
    const std::vector<long> idx = eval_indices(path, tm, tau_grid);

    const double theta_bar = prelim.theta1;
    const double info = fisher(spec.which, theta_bar, p);
    const FilterWiring w = make_wiring(spec.which, theta_bar, p);
    FilterStepper st(w, path.dt, {});

    EstimatorTrajectory out;
    out.which = spec.which;
    out.T = tm.T;
    out.delta = spec.delta;
    out.tau = tau_grid;
    out.theta1.resize(tau_grid.size());
    out.prelim = prelim;
    out.fisher_scalar = info;
    out.params = p;

    double u = 0.0;
    std::size_t next = 0;
    for (long k = 0; k < path.n_steps && next < idx.size(); ++k) {
        const double dX = path.X[k + 1] - path.X[k];
        if (k >= tm.k0) {
            const double dN = w.innovation(st.m(), dX, path.dt);
            u += w.score(st.m(), st.mdot(0), 0) * dN;
        }
        st.step(dX);
        while (next < idx.size() && idx[next] == k + 1) {
            const double t = path.time_at(k + 1);
            out.theta1[next] = theta_bar + u / (norm_at(t, tm, opts) * info);
            ++next;
        }
    }
    return out;
}

EstimatorTrajectory one_step_vector(const SamplePath& path,
                                    const PrelimResult& prelim,
                                    const ParamSpec& spec,
                                    const SystemParams& p,
                                    const std::vector<double>& tau_grid,
                                    const Mat2& fisher_at_prelim,
                                    const EstimatorOpts& opts) {
    spec.validate();
    p.validate_estimation();
    check_delta_one_step(spec, opts);
    if (!is_pair(spec.which))
        throw std::invalid_argument("one_step_vector: pair cases only");
    if (prelim.which != spec.which)
        throw std::invalid_argument("one_step_vector: prelim case mismatch");
    const Timing tm = timing_of(path, spec, opts);
    const std::vector<long> idx = eval_indices(path, tm, tau_grid);

    // conditioning guard on the frozen information matrix
    const double tr = fisher_at_prelim.a11 + fisher_at_prelim.a22;
    const double det = fisher_at_prelim.det();
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
    const double lmax = 0.5 * (tr + disc), lmin = 0.5 * (tr - disc);
    if (!(lmin > 0) || lmax / lmin > 1e10)
        throw std::runtime_error(
            "one_step_vector: information matrix is singular or "
            "ill-conditioned");
    const Mat2 info_inv = fisher_at_prelim.inverse();

    const FilterWiring w =
        make_wiring(spec.which, prelim.theta1, p, prelim.theta2);
    FilterStepper st(w, path.dt, {});

    EstimatorTrajectory out;
    out.which = spec.which;
    out.T = tm.T;
    out.delta = spec.delta;
    out.tau = tau_grid;
    out.theta1.resize(tau_grid.size());
    out.theta2.resize(tau_grid.size());
    out.prelim = prelim;
    out.fisher_matrix = fisher_at_prelim;
    out.params = p;

    double u1 = 0.0, u2 = 0.0;
    std::size_t next = 0;
    for (long k = 0; k < path.n_steps && next < idx.size(); ++k) {
        const double dX = path.X[k + 1] - path.X[k];
        if (k >= tm.k0) {
            const double dN = w.innovation(st.m(), dX, path.dt);
            u1 += w.score(st.m(), st.mdot(0), 0) * dN;
            u2 += w.score(st.m(), st.mdot(1), 1) * dN;
        }
        st.step(dX);
        while (next < idx.size() && idx[next] == k + 1) {
            const double nrm = norm_at(path.time_at(k + 1), tm, opts);
            out.theta1[next] =
                prelim.theta1 + (info_inv.a11 * u1 + info_inv.a12 * u2) / nrm;
            out.theta2[next] =
                prelim.theta2 + (info_inv.a21 * u1 + info_inv.a22 * u2) / nrm;
            ++next;
        }
    }
    return out;
}

double two_step_correction(const SamplePath& path, double theta_score,
                           double theta_filter, double tau,
                           const ParamSpec& spec, const SystemParams& p,
                           const EstimatorOpts& opts) {
    const Timing tm = timing_of(path, spec, opts);
    const long k_end = eval_indices(path, tm, {tau}).front();

    const FilterWiring ws = make_wiring(spec.which, theta_score, p);
    const FilterWiring wf = make_wiring(spec.which, theta_filter, p);
    FilterStepper score_st(ws, path.dt, {});
    FilterStepper filt_st(wf, path.dt, FilterOpts{.n_deriv = 0});

    double u = 0.0;
    for (long k = 0; k < k_end; ++k) {
        const double dX = path.X[k + 1] - path.X[k];
        if (k >= tm.k0) {
            const double dN = wf.innovation(filt_st.m(), dX, path.dt);
            u += ws.score(score_st.m(), score_st.mdot(0), 0) * dN;
        }
        score_st.step(dX);
        filt_st.step(dX);
    }
    const double info = fisher(spec.which, theta_filter, p);
    return u / (norm_at(path.time_at(k_end), tm, opts) * info);
}

EstimatorTrajectory two_step_process(const SamplePath& path,
                                     const ParamSpec& spec,
                                     const SystemParams& p,
                                     const std::vector<double>& tau_grid,
                                     const EstimatorOpts& opts) {
    spec.validate();
    p.validate_estimation();
    if (is_pair(spec.which))
        throw std::invalid_argument("two_step_process: scalar cases only");
    if (!(spec.delta > 1.0 / 3.0 && spec.delta <= 0.5))
        throw std::invalid_argument(
            "two-step process requires delta in (1/3, 1/2]");

    const PrelimResult prelim = prelim_1d(path, spec, p);
    EstimatorOpts stage_opts = opts;
    stage_opts.allow_short_delta = true;
    EstimatorTrajectory first =
        one_step_process(path, prelim, spec, p, tau_grid, stage_opts);

    EstimatorTrajectory out = first;
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
        // the innovation filter of the correction is frozen at the
        // first-stage value attained at this evaluation point
        const double th1 = std::clamp(first.theta1[i], spec.alpha, spec.beta);
        out.theta1[i] =
            th1 + two_step_correction(path, prelim.theta1, th1, tau_grid[i],
                                      spec, p, stage_opts);
    }
    return out;
}

GridMleResult grid_mle(const SamplePath& path, const ParamSpec& spec,
                       const SystemParams& p, int grid_size) {
    spec.validate();
    p.validate();
    if (grid_size < 3)
        throw std::invalid_argument("grid_mle: grid_size must be >= 3");
    if (is_pair(spec.which))
        throw std::invalid_argument("grid_mle: scalar cases only");

    GridMleResult res;
    res.thetas.resize(grid_size);
    res.loglik.resize(grid_size);
    const double step = (spec.beta - spec.alpha) / (grid_size - 1);
    const double s2 = p.sigma * p.sigma;
    for (int i = 0; i < grid_size; ++i) {
        const double theta = spec.alpha + step * i;
        const FilterWiring w = make_wiring(spec.which, theta, p);
        FilterStepper st(w, path.dt, FilterOpts{.n_deriv = 0});
        double ll = 0.0;
        for (long k = 0; k < path.n_steps; ++k) {
            const double dX = path.X[k + 1] - path.X[k];
            const double cm = w.obs_gain * st.m();
            ll += cm / s2 * dX - cm * cm / (2.0 * s2) * path.dt;
            st.step(dX);
        }
        res.thetas[i] = theta;
        res.loglik[i] = ll;
    }

    // argmax; exact ties resolve toward the grid midpoint
    const double mid = 0.5 * (grid_size - 1);
    int best = 0;
    for (int i = 1; i < grid_size; ++i) {
        if (res.loglik[i] > res.loglik[best] ||
            (res.loglik[i] == res.loglik[best] &&
             std::abs(i - mid) < std::abs(best - mid)))
            best = i;
    }
    res.theta_hat = res.thetas[best];

    // one parabolic refinement when the maximum is interior and proper
    if (best > 0 && best < grid_size - 1) {
        const double l0 = res.loglik[best - 1], l1 = res.loglik[best],
                     l2 = res.loglik[best + 1];
        const double denom = l0 - 2.0 * l1 + l2;
        if (denom < 0) {
            const double shift = 0.5 * (l0 - l2) / denom;
            res.theta_hat = res.thetas[best] + shift * step;
        }
    }
    return res;
}

ZetaTrajectory zeta_trajectory(const EstimatorTrajectory& est, double theta0,
                               double kappa) {
    if (est.tau.empty()) throw std::invalid_argument("zeta: empty trajectory");
    const double tau_min = std::pow(est.T, est.delta - 1.0);
    if (!(kappa > tau_min))
        throw std::invalid_argument("zeta: kappa must exceed T^(delta-1)");
    const double scale =
        std::sqrt(est.T * fisher(est.which, theta0, est.params));
    ZetaTrajectory z;
    z.kappa = kappa;
    z.theta0 = theta0;
    for (std::size_t i = 0; i < est.tau.size(); ++i) {
        if (est.tau[i] + 1e-12 < kappa) continue;
        z.tau.push_back(est.tau[i]);
        z.zeta.push_back(scale * (est.theta1[i] - theta0));
    }
    if (z.tau.empty())
        throw std::invalid_argument("zeta: no tau points at or beyond kappa");
    return z;
}

}  // namespace ouest
