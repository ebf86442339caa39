#include "ouest/prelim.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ouest {

const char* to_string(ClipSide c) {
    switch (c) {
        case ClipSide::None: return "none";
        case ClipSide::Lower: return "lower";
        case ClipSide::Upper: return "upper";
    }
    return "?";
}

namespace {

// Grid stride of one unit of time; the unit increments of the statistics are
// read off the simulation grid exactly.
long unit_stride(const SamplePath& path) {
    const double s = 1.0 / path.dt;
    const long stride = std::llround(s);
    if (stride < 1 || std::abs(s - static_cast<double>(stride)) > 1e-6)
        throw std::invalid_argument(
            "statistics need an integral number of grid steps per unit time");
    return stride;
}

void check_K(const SamplePath& path, long K, long stride) {
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    if (K * stride > path.n_steps)
        throw std::invalid_argument("K exceeds the path horizon");
}

long learning_K(const SamplePath& path, double delta) {
    return static_cast<long>(std::floor(std::pow(path.horizon(), delta)));
}

// Classification of the statistic against the attained range of the moment
// map on [alpha, beta].  Boundary ties go to the clipped branch.
struct Inversion {
    double theta;
    ClipSide side;
};

Inversion invert_clipped(Unknown which, double s, double alpha, double beta,
                         const SystemParams& p) {
    if (which == Unknown::F) {
        if (s >= phi(which, alpha, p).value) return {alpha, ClipSide::Lower};
        if (s <= phi(which, beta, p).value) return {beta, ClipSide::Upper};
    } else {
        const bool positive = alpha > 0;
        const double inner = positive ? alpha : beta;
        const double outer = positive ? beta : alpha;
        if (s <= phi(which, inner, p).value)
            return {inner, positive ? ClipSide::Lower : ClipSide::Upper};
        if (s >= phi(which, outer, p).value)
            return {outer, positive ? ClipSide::Upper : ClipSide::Lower};
    }
    return {invert_phi(which, s, alpha, beta, p), ClipSide::None};
}

}  // namespace

double stat_S(const SamplePath& path, long K) {
    const long stride = unit_stride(path);
    check_K(path, K, stride);
    double acc = 0.0;
    for (long k = 1; k <= K; ++k) {
        const double d = path.X[k * stride] - path.X[(k - 1) * stride];
        acc += d * d;
    }
    return acc / static_cast<double>(K);
}

double stat_R(const SamplePath& path, long K) {
    const long stride = unit_stride(path);
    check_K(path, K, stride);
    if (K < 2) throw std::invalid_argument("stat_R: K must be >= 2");
    double acc = 0.0;
    for (long k = 2; k <= K; ++k) {
        const double d1 = path.X[k * stride] - path.X[(k - 1) * stride];
        const double d0 = path.X[(k - 1) * stride] - path.X[(k - 2) * stride];
        acc += d1 * d0;
    }
    return acc / static_cast<double>(K);
}

PrelimResult prelim_from_stat(double S, long K, const ParamSpec& spec,
                              const SystemParams& p) {
    spec.validate();
    p.validate_estimation();
    if (is_pair(spec.which))
        throw std::invalid_argument("prelim_from_stat: scalar cases only");
    const auto inv = invert_clipped(spec.which, S, spec.alpha, spec.beta, p);
    PrelimResult r;
    r.which = spec.which;
    r.theta1 = inv.theta;
    r.K = K;
    r.stat_S = S;
    r.clipped1 = inv.side;
    return r;
}

PrelimResult prelim_1d(const SamplePath& path, const ParamSpec& spec,
                       const SystemParams& p) {
    const long K = learning_K(path, spec.delta);
    return prelim_from_stat(stat_S(path, K), K, spec, p);
}

PrelimResult prelim_2d_from_stats(double S, double R, long K,
                                  const ParamSpec& spec,
                                  const SystemParams& p) {
    spec.validate();
    p.validate_estimation();
    if (!is_pair(spec.which))
        throw std::invalid_argument("prelim_2d_from_stats: pair cases only");

    PrelimResult r;
    r.which = spec.which;
    r.K = K;
    r.stat_S = S;
    r.stat_R = R;

    // First coordinate from the ratio (S - sigma^2)/R.  A non-positive R is
    // read as a vanishing increment correlation, i.e. fast mean reversion:
    // clip to the upper f bound.
    double f_star;
    if (R <= 0) {
        f_star = spec.beta;
        r.clipped1 = ClipSide::Upper;
    } else {
        const double q = (S - p.sigma * p.sigma) / R;
        const auto inv = invert_phi_ratio(q, spec.alpha, spec.beta);
        f_star = inv.x;
        r.clipped1 = inv.clipped_low
                         ? ClipSide::Lower
                         : (inv.clipped_high ? ClipSide::Upper : ClipSide::None);
    }
    r.theta1 = f_star;

    // Second coordinate from S at the estimated f.
    const Unknown second =
        spec.which == Unknown::FB ? Unknown::B : Unknown::A;
    ParamSpec sub;
    sub.which = second;
    sub.alpha = spec.alpha2;
    sub.beta = spec.beta2;
    sub.delta = spec.delta;
    SystemParams p_at_f = p;
    p_at_f.f = f_star;
    const auto inv2 =
        invert_clipped(second, S, spec.alpha2, spec.beta2, p_at_f);
    r.theta2 = inv2.theta;
    r.clipped2 = inv2.side;
    return r;
}

PrelimResult prelim_2d(const SamplePath& path, const ParamSpec& spec,
                       const SystemParams& p) {
    const long K = learning_K(path, spec.delta);
    return prelim_2d_from_stats(stat_S(path, K), stat_R(path, K), K, spec, p);
}

std::string PrelimResult::to_json(std::uint64_t seed) const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"case\":\"" << ouest::to_string(which) << "\",\"theta_bar\":";
    if (is_pair(which))
        os << "[" << theta1 << "," << theta2 << "]";
    else
        os << theta1;
    os << ",\"K\":" << K << ",\"S_K\":" << stat_S;
    if (!std::isnan(stat_R)) os << ",\"R_K\":" << stat_R;
    os << ",\"clipped\":[\"" << ouest::to_string(clipped1) << "\",\""
       << ouest::to_string(clipped2) << "\"],\"seed\":" << seed << "}";
    return os.str();
}

}  // namespace ouest
