#include "ouest/oracle.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ouest/filter.hpp"
#include "ouest/rng.hpp"
#include "ouest/sim.hpp"

namespace ouest {

namespace {

struct EffModel {
    double f, b, c;
};

EffModel eff_model(Unknown which, double th1, const SystemParams& p,
                   double th2 = 0) {
    switch (which) {
        case Unknown::F: return {th1, p.b, p.a};
        case Unknown::B: return {p.f, th1, p.a};
        case Unknown::A: return {p.f, p.b, th1};
        case Unknown::FB: return {th1, th2, p.a};
        case Unknown::FA: return {th1, p.b, th2};
    }
    throw std::invalid_argument("eff_model: bad case");
}

using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;

// E Y_t Y_s for the OU state started at N(0, d2):
// (d2 - b^2/2f) e^{-f(t+s)} + (b^2/2f) e^{-f|t-s|}
double state_autocov(double f, double b, double d2, double t, double s) {
    const double v = b * b / (2.0 * f);
    return (d2 - v) * std::exp(-f * (t + s)) + v * std::exp(-f * std::abs(t - s));
}

// Integral of the autocovariance over [t_lo,t_hi] x [s_lo,s_hi] by nested
// adaptive quadrature, the inner integral split at the |t-s| kink.
double autocov_rectangle(double f, double b, double d2, double t_lo,
                         double t_hi, double s_lo, double s_hi) {
    auto inner = [&](double t) {
        auto kernel = [&](double s) { return state_autocov(f, b, d2, t, s); };
        if (t > s_lo && t < s_hi) {
            return Quad::integrate(kernel, s_lo, t, 15, 1e-12) +
                   Quad::integrate(kernel, t, s_hi, 15, 1e-12);
        }
        return Quad::integrate(kernel, s_lo, s_hi, 15, 1e-12);
    };
    return Quad::integrate(inner, t_lo, t_hi, 15, 1e-11);
}

}  // namespace

double stationary_state_variance(Unknown which, double theta,
                                 const SystemParams& p) {
    const auto m = eff_model(which, theta, p, true_value(p, which, 1));
    return m.b * m.b / (2.0 * m.f);
}

double quad_phi_oracle(Unknown which, double theta, const SystemParams& p,
                       int k) {
    p.validate();
    if (k < 1) throw std::invalid_argument("quad_phi_oracle: k must be >= 1");
    const auto m = eff_model(which, theta, p);
    const double lo = static_cast<double>(k - 1), hi = static_cast<double>(k);
    const double integral =
        m.b == 0 ? 0.0 : autocov_rectangle(m.f, m.b, p.d2, lo, hi, lo, hi);
    return m.c * m.c * integral + p.sigma * p.sigma;
}

double quad_xi_oracle(const SystemParams& p, int k) {
    p.validate();
    if (k < 2) throw std::invalid_argument("quad_xi_oracle: k must be >= 2");
    const double integral =
        p.b == 0 ? 0.0
                 : autocov_rectangle(p.f, p.b, p.d2, k - 1, k, k - 2, k - 1);
    return p.a * p.a * integral;
}

double lyapunov_fisher_oracle(Unknown which, double theta,
                              const SystemParams& p) {
    p.validate_estimation();
    if (is_pair(which))
        throw std::invalid_argument("lyapunov_fisher_oracle: scalar cases only");
    const FilterWiring w = make_wiring(which, theta, p);
    const double sigma = w.sigma;

    // At the true parameter the innovation substitution dX = c m dt +
    // sigma dWbar turns the (m, mdot) recursions into the linear system
    //   dm    = -md m dt + G1 dWbar,          md = decay - gain c
    //   dmdot = (cpl m - decay mdot) dt + G2 dWbar,
    //   cpl = -ddecay + dgain c
    const double md = w.decay - w.gain * w.obs_gain;
    const double cpl = -w.ddecay[0] + w.dgain[0] * w.obs_gain;
    const double G1 = w.gain * sigma;
    const double G2 = w.dgain[0] * sigma;
    if (!(md > 0) || !(w.decay > 0))
        throw std::runtime_error("lyapunov_fisher_oracle: drift not Hurwitz");

    const double S11 = G1 * G1 / (2.0 * md);
    const double S12 = (cpl * S11 + G1 * G2) / (md + w.decay);
    const double S22 = (2.0 * cpl * S12 + G2 * G2) / (2.0 * w.decay);

    const double c = w.obs_gain, cd = w.dobs[0];
    return (c * c * S22 + 2.0 * c * cd * S12 + cd * cd * S11) /
           (sigma * sigma);
}

namespace {

// Common walk for the Monte Carlo information averages.
template <typename Accum>
void score_walk(Unknown which, double th1, double th2, const SystemParams& p,
                double T, double dt, std::uint64_t seed, Accum&& accum) {
    SystemParams pt = with_unknown(p, which, th1, is_pair(which) ? th2 : 0.0);
    pt.validate_estimation();
    pt.d2 = pt.b * pt.b / (2.0 * pt.f);  // stationary hidden state
    SimConfig cfg;
    cfg.dt = dt;
    cfg.horizon_T = T;
    cfg.seed = seed;
    cfg.scheme = Scheme::Exact;
    const SamplePath path = simulate(pt, cfg);

    const FilterWiring w = make_wiring(which, th1, pt, th2);
    FilterStepper st(w, dt, {});
    for (long k = 0; k < path.n_steps; ++k) {
        accum(w, st);
        st.step(path.X[k + 1] - path.X[k]);
    }
}

}  // namespace

double fisher_mc_oracle(Unknown which, double theta, const SystemParams& p,
                        double T, double dt, std::uint64_t seed) {
    if (is_pair(which))
        throw std::invalid_argument("fisher_mc_oracle: scalar cases only");
    double acc = 0.0;
    long n = 0;
    score_walk(which, theta, 0.0, p, T, dt, seed,
               [&](const FilterWiring& w, const FilterStepper& st) {
                   const double psi = w.score(st.m(), st.mdot(0), 0);
                   acc += psi * psi;
                   ++n;
               });
    return acc / static_cast<double>(n) * p.sigma * p.sigma;
}

Fisher2x2 fisher_matrix_numeric(Unknown which, double theta1, double theta2,
                                const SystemParams& p, double T, double dt,
                                std::uint64_t seed) {
    if (!is_pair(which))
        throw std::invalid_argument("fisher_matrix_numeric: pair cases only");
    double a11 = 0, a12 = 0, a22 = 0;
    long n = 0;
    score_walk(which, theta1, theta2, p, T, dt, seed,
               [&](const FilterWiring& w, const FilterStepper& st) {
                   const double p1 = w.score(st.m(), st.mdot(0), 0);
                   const double p2 = w.score(st.m(), st.mdot(1), 1);
                   a11 += p1 * p1;
                   a12 += p1 * p2;
                   a22 += p2 * p2;
                   ++n;
               });
    const double s2 = p.sigma * p.sigma;
    Fisher2x2 out;
    out.info = {a11 / n * s2, a12 / n * s2, a12 / n * s2, a22 / n * s2};
    out.positive_definite = out.info.a11 > 0 && out.info.det() > 0;
    return out;
}

std::string OracleReport::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"quantity\":\"" << quantity << "\",\"closed_form\":" << closed_form
       << ",\"oracle_value\":" << oracle_value << ",\"abs_err\":" << abs_err
       << ",\"rel_err\":" << rel_err << ",\"tolerance\":" << tolerance
       << ",\"method\":\"" << method << "\",\"pass\":"
       << (within_tolerance() ? "true" : "false") << "}";
    return os.str();
}

namespace {

OracleReport make_report(std::string quantity, double closed, double oracle,
                         double tol, std::string method) {
    OracleReport r;
    r.quantity = std::move(quantity);
    r.closed_form = closed;
    r.oracle_value = oracle;
    r.abs_err = std::abs(closed - oracle);
    r.rel_err = r.abs_err / std::max(std::abs(closed), 1e-300);
    r.tolerance = tol;
    r.method = std::move(method);
    return r;
}

}  // namespace

std::vector<OracleReport> oracle_table() {
    std::vector<OracleReport> rows;
    SystemParams p;  // a = f = b = sigma = 1

    for (Unknown which : {Unknown::F, Unknown::B, Unknown::A}) {
        for (double theta : {0.7, 1.0, 1.6}) {
            SystemParams q = with_unknown(p, which, theta);
            q.d2 = q.b * q.b / (2.0 * q.f);
            rows.push_back(make_report(
                std::string("phi_") + to_string(which) + "(" +
                    std::to_string(theta) + ")",
                phi(which, theta, q).value, quad_phi_oracle(which, theta, q),
                1e-8, "adaptive quadrature of the increment variance"));
            rows.push_back(make_report(
                std::string("fisher_") + to_string(which) + "(" +
                    std::to_string(theta) + ")",
                fisher(which, theta, q), lyapunov_fisher_oracle(which, theta, q),
                1e-8, "stationary covariance of the (m, mdot) system"));
        }
    }
    {
        SystemParams q = p;
        q.d2 = q.b * q.b / (2.0 * q.f);
        rows.push_back(make_report(
            "xi(1)", q.a * q.a * q.b * q.b / (2.0 * std::pow(q.f, 3)) *
                         std::pow(math_detail::one_minus_exp_neg(q.f), 2),
            quad_xi_oracle(q), 1e-8,
            "adaptive quadrature of the lag-one increment covariance"));
    }
    for (Unknown which : {Unknown::F, Unknown::B, Unknown::A}) {
        rows.push_back(make_report(
            std::string("fisher_") + to_string(which) + "(1) [mc]",
            fisher(which, 1.0, p), fisher_mc_oracle(which, 1.0, p, 2e4, 0.005),
            0.02, "time-average of the squared score factor"));
    }
    return rows;
}

}  // namespace ouest
