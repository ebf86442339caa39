#include "ouest/filter.hpp"

#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ouest {

namespace {

struct EffectiveModel {
    double f, b, c;  // state drift, state noise, observation gain
};

EffectiveModel effective_model(Unknown which, double th1, double th2,
                               const SystemParams& p) {
    switch (which) {
        case Unknown::F: return {th1, p.b, p.a};
        case Unknown::B: return {p.f, th1, p.a};
        case Unknown::A: return {p.f, p.b, th1};
        case Unknown::FB: return {th1, th2, p.a};
        case Unknown::FA: return {th1, p.b, th2};
    }
    throw std::invalid_argument("effective_model: bad case");
}

}  // namespace

FilterWiring make_wiring(Unknown which, double theta1, const SystemParams& p,
                         double theta2) {
    p.validate();
    const auto [fe, be, c] = effective_model(which, theta1, theta2, p);
    if (!(fe > 0))
        throw std::invalid_argument("make_wiring: state drift must be > 0");
    const double s2 = p.sigma * p.sigma;

    FilterWiring w;
    w.which = which;
    w.n_unknown = is_pair(which) ? 2 : 1;
    w.theta1 = theta1;
    w.theta2 = theta2;
    w.sigma = p.sigma;
    w.f_eff = fe;
    w.b_eff = be;
    w.obs_gain = c;

    const double R = std::hypot(fe, c * be / p.sigma);
    const double gamma = be * be / (R + fe);
    w.decay = R;  // fe + gamma c^2/sigma^2 collapses to R
    w.gain = gamma * c / s2;
    w.gamma = gamma;

    const double dR_df = fe / R;
    const double dR_db = c * c * be / (s2 * R);
    const double dR_dc = c * be * be / (s2 * R);
    const double dgamma_df = -gamma / R;
    const double dgamma_db = be / R;
    const double dgamma_dc = -be * be * dR_dc / ((R + fe) * (R + fe));

    auto fill = [&](int j, char coord) {
        switch (coord) {
            case 'f':
                w.ddecay[j] = dR_df;
                w.dgain[j] = dgamma_df * c / s2;
                if (j == 0) w.dgamma = dgamma_df;
                break;
            case 'b':
                w.ddecay[j] = dR_db;
                w.dgain[j] = dgamma_db * c / s2;
                if (j == 0) w.dgamma = dgamma_db;
                break;
            case 'c':
                w.ddecay[j] = dR_dc;
                w.dgain[j] = (dgamma_dc * c + gamma) / s2;
                w.dobs[j] = 1.0;
                if (j == 0) w.dgamma = dgamma_dc;
                break;
        }
    };
    switch (which) {
        case Unknown::F: fill(0, 'f'); break;
        case Unknown::B: fill(0, 'b'); break;
        case Unknown::A: fill(0, 'c'); break;
        case Unknown::FB: fill(0, 'f'); fill(1, 'b'); break;
        case Unknown::FA: fill(0, 'f'); fill(1, 'c'); break;
    }
    if (which == Unknown::F) {
        w.d2decay = (R * R - fe * fe) / (R * R * R);
        w.d2gain = gamma * (R + fe) / (R * R * R) * c / s2;
    }
    return w;
}

FilterStepper::FilterStepper(const FilterWiring& w, double dt,
                             const FilterOpts& opts)
    : w_(w), dt_(dt) {
    if (!(dt > 0)) throw std::invalid_argument("FilterStepper: dt must be > 0");
    if (!opts.stationary_gamma)
        throw std::invalid_argument(
            "FilterStepper: stationary gain only; use run_filter for the "
            "transient gain");
    n_deriv_ = opts.n_deriv < 0 ? w.n_unknown : opts.n_deriv;
    with_mddot_ = opts.with_mddot;
    if (with_mddot_ && w.which != Unknown::F)
        throw std::invalid_argument(
            "FilterStepper: second derivative is wired for case F only");
    m_ = opts.m0;
    E_ = std::exp(-w.decay * dt);
    for (int j = 0; j < 2; ++j) dE_[j] = -w.ddecay[j] * dt * E_;
    d2E_ = (-w.d2decay * dt + w.ddecay[0] * dt * w.ddecay[0] * dt) * E_;
}

void FilterStepper::step(double dX) {
    const double m_old = m_;
    const double md0_old = md_[0];
    m_ = E_ * m_old + w_.gain * dX;
    for (int j = 0; j < n_deriv_; ++j)
        md_[j] = E_ * md_[j] + dE_[j] * m_old + w_.dgain[j] * dX;
    if (with_mddot_)
        mdd_ = E_ * mdd_ + 2.0 * dE_[0] * md0_old + d2E_ * m_old + w_.d2gain * dX;
    ++k_;
    t_ = dt_ * static_cast<double>(k_);
    if (std::abs(m_) > 1e8) {
        std::ostringstream msg;
        msg << "filter diverged: |m| > 1e8 at t = " << t_
            << " (dt * decay = " << dt_ * w_.decay << ")";
        throw std::runtime_error(msg.str());
    }
}

FilterTrajectory run_filter(const SamplePath& path, Unknown which,
                            double theta, const SystemParams& p,
                            const FilterOpts& opts, double theta2) {
    const FilterWiring w = make_wiring(which, theta, p, theta2);
    const long n = path.n_steps;

    FilterTrajectory out;
    out.which = which;
    out.theta1 = theta;
    out.theta2 = theta2;
    out.dt = path.dt;
    out.m.resize(n + 1);
    out.gamma.resize(n + 1);
    out.m[0] = opts.m0;

    if (!opts.stationary_gamma) {
        // Time-dependent Riccati gain; conditional mean only.
        const double s2 = w.sigma * w.sigma;
        double m = opts.m0;
        out.gamma[0] = p.d2;
        for (long k = 0; k < n; ++k) {
            const double g_t = gamma_transient_general(
                w.f_eff, w.b_eff, w.obs_gain, w.sigma, p.d2, path.time_at(k));
            const double D = w.f_eff + g_t * w.obs_gain * w.obs_gain / s2;
            m = std::exp(-D * path.dt) * m +
                (g_t * w.obs_gain / s2) * (path.X[k + 1] - path.X[k]);
            out.m[k + 1] = m;
            out.gamma[k + 1] = gamma_transient_general(
                w.f_eff, w.b_eff, w.obs_gain, w.sigma, p.d2, path.time_at(k + 1));
        }
        return out;
    }

    FilterStepper stepper(w, path.dt, opts);
    const int nd = opts.n_deriv < 0 ? w.n_unknown : opts.n_deriv;
    if (nd >= 1) out.mdot.resize(n + 1);
    if (nd >= 2) out.mdot2.resize(n + 1);
    if (opts.with_mddot) out.mddot.resize(n + 1);
    out.gamma[0] = w.gamma;
    for (long k = 0; k < n; ++k) {
        stepper.step(path.X[k + 1] - path.X[k]);
        out.m[k + 1] = stepper.m();
        if (nd >= 1) out.mdot[k + 1] = stepper.mdot(0);
        if (nd >= 2) out.mdot2[k + 1] = stepper.mdot(1);
        if (opts.with_mddot) out.mddot[k + 1] = stepper.mddot();
        out.gamma[k + 1] = w.gamma;
    }
    return out;
}

double gamma_transient_general(double fe, double be, double c, double sigma,
                               double d2, double t) {
    const double s2 = sigma * sigma;
    const double R = std::hypot(fe, c * be / sigma);
    const double gs = be * be / (R + fe);
    if (std::abs(d2 - gs) < 1e-14) return gs;
    const double e2 = std::exp(-2.0 * R * t);
    const double bracket =
        1.0 / (d2 - gs) + (c * c / (2.0 * R * s2)) * (1.0 - e2);
    return e2 / bracket + gs;
}

std::vector<double> riccati_ode(double theta, double d2, double t_end,
                                const SystemParams& p,
                                const std::vector<double>& sample_times) {
    if (!(t_end > 0))
        throw std::invalid_argument("riccati_ode: t_end must be > 0");
    p.validate();
    const double a2s2 = p.a * p.a / (p.sigma * p.sigma);
    const double b2 = p.b * p.b;
    auto rhs = [&](const double& g, double& dgdt, double /*t*/) {
        dgdt = -2.0 * theta * g - g * g * a2s2 + b2;
    };
    namespace odeint = boost::numeric::odeint;
    auto stepper = odeint::make_controlled(
        1e-12, 1e-10, odeint::runge_kutta_dopri5<double>());
    std::vector<double> out;
    out.reserve(sample_times.size());
    double g = d2;
    double t = 0.0;
    for (double ts : sample_times) {
        if (ts < t)
            throw std::invalid_argument("riccati_ode: times must be sorted");
        if (ts > t_end + 1e-12)
            throw std::invalid_argument("riccati_ode: time beyond t_end");
        if (ts > t) {
            odeint::integrate_adaptive(stepper, rhs, g, t, ts,
                                       std::min(1e-3, ts - t));
            t = ts;
        }
        out.push_back(g);
    }
    return out;
}

long learning_end_index(double T, double delta, double dt) {
    const double t_delta = std::pow(T, delta);
    return static_cast<long>(std::ceil(t_delta / dt - 1e-9));
}

double AdaptiveTrajectory::theta_at_time(double t) const {
    const long k = std::llround(t / dt);
    const long i = k - k_start;
    if (i < 0 || i >= static_cast<long>(theta_star.size()))
        throw std::out_of_range("AdaptiveTrajectory: time outside trajectory");
    return theta_star[i];
}

AdaptiveTrajectory adaptive_system(const SamplePath& path, double prelim,
                                   const ParamSpec& spec,
                                   const SystemParams& p,
                                   const AdaptiveOpts& opts) {
    spec.validate();
    p.validate_estimation();
    if (is_pair(spec.which))
        throw std::invalid_argument("adaptive_system: scalar cases only");
    const double T = path.horizon();
    const double T_delta = std::pow(T, spec.delta);
    const long k0 = learning_end_index(T, spec.delta, path.dt);
    const long n = path.n_steps;
    if (k0 >= n)
        throw std::invalid_argument(
            "adaptive_system: learning interval covers the path");

    const FilterWiring w = make_wiring(spec.which, prelim, p);
    const double info = fisher(spec.which, prelim, p);
    FilterStepper frozen(w, path.dt, {});

    const double width = spec.beta - spec.alpha;
    const double mid = 0.5 * (spec.alpha + spec.beta);
    const double guard_lo = mid - 0.5 * opts.guard_widths * width;
    const double guard_hi = mid + 0.5 * opts.guard_widths * width;

    AdaptiveTrajectory out;
    out.k_start = k0;
    out.dt = path.dt;
    out.T_delta = T_delta;
    out.prelim = prelim;
    out.theta_star.reserve(n - k0 + 1);
    out.m_adaptive.reserve(n - k0 + 1);

    for (long k = 0; k < k0; ++k) frozen.step(path.X[k + 1] - path.X[k]);

    double theta = prelim;
    double m_a = frozen.m();  // seeded from the frozen filter at the boundary
    double u = 0.0;           // cumulative score integral (recentred form)
    double v = (path.time_at(k0) - T_delta) * prelim;  // paper-literal state
    out.theta_star.push_back(theta);
    out.m_adaptive.push_back(m_a);

    const double s2 = p.sigma * p.sigma;
    for (long k = k0; k < n; ++k) {
        const double dX = path.X[k + 1] - path.X[k];
        const double t_k = path.time_at(k);
        const double t_next = path.time_at(k + 1);
        const double dN = w.innovation(frozen.m(), dX, path.dt);
        const double psi = w.score(frozen.m(), frozen.mdot(0), 0);

        if (opts.paper_drift) {
            // d[(t - T^delta) theta*] = (t - T^delta) gain(t) dN, with the
            // literal mixed denominators of the recurrent form
            v += (t_k - T_delta) * psi * dN / (info * t_k);
            theta = v / (t_next - T_delta);
        } else {
            const double norm = opts.norm_from_learning_end
                                    ? t_next - T_delta
                                    : t_next;
            u += psi * dN;
            theta = prelim + u / (norm * info);
        }
        if (theta < guard_lo) {
            theta = guard_lo;
            ++out.clamp_count;
        } else if (theta > guard_hi) {
            theta = guard_hi;
            ++out.clamp_count;
        }

        // adaptive filter with the gain re-evaluated at the running estimate
        const auto em = effective_model(spec.which, theta, 0.0, p);
        const double R = std::hypot(em.f, em.c * em.b / p.sigma);
        const double ga = em.b * em.b / (R + em.f);
        const double D = em.f + ga * em.c * em.c / s2;
        m_a = std::exp(-D * path.dt) * m_a + (ga * em.c / s2) * dX;

        frozen.step(dX);
        out.theta_star.push_back(theta);
        out.m_adaptive.push_back(m_a);
    }
    return out;
}

}  // namespace ouest
