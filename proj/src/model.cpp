#include "ouest/model.hpp"

#include <cmath>
#include <stdexcept>

namespace ouest {

namespace math_detail {

double em1px(double x) {
    if (std::abs(x) < 1e-4) {
        // x^2/2 - x^3/6 + x^4/24 - x^5/120
        return x * x * (0.5 + x * (-1.0 / 6.0 + x * (1.0 / 24.0 - x / 120.0)));
    }
    return std::expm1(-x) + x;
}

double one_minus_exp_neg(double x) { return -std::expm1(-x); }

double integrated_ou_var_bracket(double x) {
    if (std::abs(x) < 1e-3) {
        // x^3/3 - x^4/4 + 7x^5/60 - x^6/24
        return x * x * x *
               (1.0 / 3.0 + x * (-0.25 + x * (7.0 / 60.0 - x / 24.0)));
    }
    return x - 2.0 * one_minus_exp_neg(x) + 0.5 * one_minus_exp_neg(2.0 * x);
}

}  // namespace math_detail

using math_detail::em1px;
using math_detail::one_minus_exp_neg;

bool is_pair(Unknown which) {
    return which == Unknown::FB || which == Unknown::FA;
}

const char* to_string(Unknown which) {
    switch (which) {
        case Unknown::F: return "F";
        case Unknown::B: return "B";
        case Unknown::A: return "A";
        case Unknown::FB: return "FB";
        case Unknown::FA: return "FA";
    }
    return "?";
}

Unknown unknown_from_string(std::string_view s) {
    if (s == "F" || s == "f") return Unknown::F;
    if (s == "B" || s == "b") return Unknown::B;
    if (s == "A" || s == "a") return Unknown::A;
    if (s == "FB" || s == "fb") return Unknown::FB;
    if (s == "FA" || s == "fa") return Unknown::FA;
    throw std::invalid_argument("unknown parameter case: " + std::string(s));
}

void SystemParams::validate() const {
    if (!(f > 0)) throw std::invalid_argument("SystemParams: f must be > 0");
    if (sigma == 0) throw std::invalid_argument("SystemParams: sigma must be nonzero");
    if (!(d2 >= 0)) throw std::invalid_argument("SystemParams: d2 must be >= 0");
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(f) ||
        !std::isfinite(sigma) || !std::isfinite(d2))
        throw std::invalid_argument("SystemParams: non-finite coefficient");
}

void SystemParams::validate_estimation() const {
    validate();
    if (a == 0) throw std::invalid_argument("SystemParams: a must be nonzero");
    if (b == 0) throw std::invalid_argument("SystemParams: b must be nonzero");
}

SystemParams with_unknown(const SystemParams& p, Unknown which, double v1,
                          double v2) {
    SystemParams q = p;
    switch (which) {
        case Unknown::F: q.f = v1; break;
        case Unknown::B: q.b = v1; break;
        case Unknown::A: q.a = v1; break;
        case Unknown::FB: q.f = v1; q.b = v2; break;
        case Unknown::FA: q.f = v1; q.a = v2; break;
    }
    q.validate();
    return q;
}

double true_value(const SystemParams& p, Unknown which, int coord) {
    switch (which) {
        case Unknown::F: return p.f;
        case Unknown::B: return p.b;
        case Unknown::A: return p.a;
        case Unknown::FB: return coord == 0 ? p.f : p.b;
        case Unknown::FA: return coord == 0 ? p.f : p.a;
    }
    return 0;
}

void ParamSpec::validate() const {
    auto check_interval = [](double lo, double hi, bool positive,
                             const char* what) {
        if (!(lo < hi))
            throw std::invalid_argument(std::string("ParamSpec: ") + what +
                                        ": alpha must be < beta");
        if (lo <= 0 && hi >= 0)
            throw std::invalid_argument(std::string("ParamSpec: ") + what +
                                        ": bounds must exclude 0");
        if (positive && !(lo > 0))
            throw std::invalid_argument(std::string("ParamSpec: ") + what +
                                        ": bounds must be positive");
    };
    const bool f_first =
        which == Unknown::F || which == Unknown::FB || which == Unknown::FA;
    check_interval(alpha, beta, f_first, "first coordinate");
    if (is_pair(which)) check_interval(alpha2, beta2, false, "second coordinate");
    if (!(delta > 1.0 / 3.0 && delta < 1.0))
        throw std::invalid_argument("ParamSpec: delta must lie in (1/3, 1)");
}

namespace {

// Coefficient c such that phi = c * theta^2 + sigma^2 for cases B and A.
double quadratic_phi_coeff(Unknown which, const SystemParams& p) {
    const double gain2 = which == Unknown::B ? p.a * p.a : p.b * p.b;
    return gain2 * em1px(p.f) / (p.f * p.f * p.f);
}

}  // namespace

PhiEval phi(Unknown which, double theta, const SystemParams& p) {
    p.validate();
    const double s2 = p.sigma * p.sigma;
    switch (which) {
        case Unknown::F: {
            if (!(theta > 0))
                throw std::invalid_argument("phi: case F requires theta > 0");
            const double c = p.a * p.a * p.b * p.b;
            const double t3 = theta * theta * theta;
            const double value = c * em1px(theta) / t3 + s2;
            // d/dtheta [em1px(t)/t^3] = (t(1-e^-t) - 3 em1px(t)) / t^4
            double deriv;
            if (theta < 1e-4) {
                // series: -1/(2 t^2) + 1/24 - t/60
                deriv = c * (-0.5 / (theta * theta) + 1.0 / 24.0 - theta / 60.0);
            } else {
                deriv = c *
                        (theta * one_minus_exp_neg(theta) - 3.0 * em1px(theta)) /
                        (t3 * theta);
            }
            return {value, deriv};
        }
        case Unknown::B:
        case Unknown::A: {
            const double c = quadratic_phi_coeff(which, p);
            return {c * theta * theta + s2, 2.0 * c * theta};
        }
        default:
            throw std::invalid_argument("phi: scalar cases only");
    }
}

double invert_phi(Unknown which, double s, double alpha, double beta,
                  const SystemParams& p) {
    if (!std::isfinite(s)) throw std::invalid_argument("invert_phi: s not finite");
    if (!(alpha < beta)) throw std::invalid_argument("invert_phi: bad bounds");
    p.validate_estimation();
    if (which == Unknown::F) {
        // Strictly decreasing; clip outside the attained range.
        if (s >= phi(which, alpha, p).value) return alpha;
        if (s <= phi(which, beta, p).value) return beta;
        double lo = alpha, hi = beta;
        while (hi - lo > 1e-12) {
            const double mid = 0.5 * (lo + hi);
            if (phi(which, mid, p).value > s)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }
    // Quadratic cases: increasing in |theta|, closed-form inversion.  On a
    // negative interval the map is decreasing and the clip sides swap.
    const bool positive = alpha > 0;
    const double inner = positive ? alpha : beta;  // smaller |theta|
    const double outer = positive ? beta : alpha;
    if (s <= phi(which, inner, p).value) return inner;
    if (s >= phi(which, outer, p).value) return outer;
    const double c = quadratic_phi_coeff(which, p);
    const double root = std::sqrt((s - p.sigma * p.sigma) / c);
    return positive ? root : -root;
}

REval r_of(double theta, const SystemParams& p) {
    p.validate();
    const double r = std::hypot(theta, p.a * p.b / p.sigma);
    return {r, r > 0 ? theta / r : 0.0};
}

GammaEval gamma_stationary(Unknown which, double theta, const SystemParams& p) {
    p.validate();
    const double s2 = p.sigma * p.sigma;
    switch (which) {
        case Unknown::F: {
            const auto [r, rd] = r_of(theta, p);
            // (sigma^2/a^2)(r - theta) = b^2 / (r + theta); stable for large
            // theta and well defined in the a = 0 limit
            const double gamma = p.b * p.b / (r + theta);
            const double dgamma = r > 0 ? -gamma / r : 0.0;
            const double d2gamma =
                r > 0 ? gamma * (r + theta) / (r * r * r) : 0.0;
            return {gamma, dgamma, d2gamma};
        }
        case Unknown::B: {
            const double A = std::hypot(p.f, theta * p.a / p.sigma);
            return {theta * theta / (A + p.f), A > 0 ? theta / A : 0.0};
        }
        case Unknown::A: {
            if (theta == 0)
                throw std::invalid_argument("gamma_stationary: case A needs theta != 0");
            const double A = std::hypot(p.f, theta * p.b / p.sigma);
            const double b2 = p.b * p.b;
            const double value = b2 / (A + p.f);
            const double deriv =
                -theta * b2 * b2 / (s2 * A * (A + p.f) * (A + p.f));
            return {value, deriv};
        }
        default:
            throw std::invalid_argument("gamma_stationary: scalar cases only");
    }
}

double gamma_transient(double theta, double t, const SystemParams& p) {
    if (!(t >= 0)) throw std::invalid_argument("gamma_transient: t must be >= 0");
    const double gs = gamma_stationary(Unknown::F, theta, p).value;
    if (std::abs(p.d2 - gs) < 1e-14) return gs;  // removable singularity
    const double r = r_of(theta, p).r;
    const double s2 = p.sigma * p.sigma;
    const double e2 = std::exp(-2.0 * r * t);
    const double bracket =
        1.0 / (p.d2 - gs) + (p.a * p.a / (2.0 * r * s2)) * (1.0 - e2);
    return e2 / bracket + gs;
}

double fisher(Unknown which, double theta, const SystemParams& p) {
    p.validate();
    const double s2 = p.sigma * p.sigma;
    switch (which) {
        case Unknown::F: {
            if (!(theta > 0))
                throw std::invalid_argument("fisher: case F requires theta > 0");
            const auto [r, rd] = r_of(theta, p);
            return 0.5 / theta - 2.0 * rd / (r + theta) + rd * rd / (2.0 * r);
        }
        case Unknown::B: {
            const double A = std::hypot(p.f, theta * p.a / p.sigma);
            const double a2 = p.a * p.a;
            return theta * theta * a2 * a2 / (2.0 * s2 * s2 * A * A * A);
        }
        case Unknown::A: {
            // sigma^-2 Var(m + theta*mdot); the exp(-f(t-s)) kernels of m and
            // theta*mdot cancel exactly, leaving the exp(-A(t-s)) component
            // with weight theta * (gamma_hat' theta + 2 gamma_hat)/sigma =
            // sigma A'(theta).
            const double A = std::hypot(p.f, theta * p.b / p.sigma);
            const double b2 = p.b * p.b;
            return theta * theta * b2 * b2 / (2.0 * s2 * s2 * A * A * A);
        }
        default:
            throw std::invalid_argument("fisher: scalar cases only");
    }
}

double phi_ratio(double x) {
    if (!(x > 0)) throw std::invalid_argument("phi_ratio: x must be > 0");
    const double d = one_minus_exp_neg(x);
    return 2.0 * em1px(x) / (d * d);
}

PhiRatioInv invert_phi_ratio(double q, double alpha, double beta) {
    if (!(0 < alpha && alpha < beta))
        throw std::invalid_argument("invert_phi_ratio: need 0 < alpha < beta");
    if (q <= phi_ratio(alpha)) return {alpha, true, false};
    if (q >= phi_ratio(beta)) return {beta, false, true};
    double lo = alpha, hi = beta;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (phi_ratio(mid) < q)
            lo = mid;
        else
            hi = mid;
    }
    return {0.5 * (lo + hi)};
}

Mat2 Mat2::inverse() const {
    const double d = det();
    if (d == 0) throw std::runtime_error("Mat2: singular matrix");
    return {a22 / d, -a12 / d, -a21 / d, a11 / d};
}

}  // namespace ouest
