#pragma once

#include <string>
#include <string_view>

// Closed-form quantities of the partially observed linear system
//
//   dX_t = a Y_t dt + sigma dW_t,        X_0 = 0,
//   dY_t = -f Y_t dt + b dV_t,           Y_0 ~ N(0, d2),
//
// where X is observed and the Ornstein-Uhlenbeck state Y is hidden.
// One of the coefficients (or a pair) is treated as the unknown parameter;
// everything in this header is a pure function of that parameter and the
// remaining (known) coefficients.

namespace ouest {

// Which coordinate(s) of (f, b, a) are unknown.
enum class Unknown { F, B, A, FB, FA };

bool is_pair(Unknown which);
const char* to_string(Unknown which);
Unknown unknown_from_string(std::string_view s);

struct SystemParams {
    double a = 1.0;      // observation gain
    double f = 1.0;      // mean-reversion rate of the hidden state (> 0)
    double b = 1.0;      // hidden-state noise intensity
    double sigma = 1.0;  // observation noise intensity (!= 0)
    double d2 = 0.0;     // variance of the initial hidden state (>= 0)

    // f > 0, sigma != 0, d2 >= 0.  Degenerate a = 0 or b = 0 is allowed
    // here so diagnostic paths can be simulated; estimation entry points
    // additionally call validate_estimation().
    void validate() const;
    void validate_estimation() const;  // also a != 0 and b != 0
};

// Copy of `p` with the unknown coordinate(s) replaced by v1 (and v2).
SystemParams with_unknown(const SystemParams& p, Unknown which, double v1,
                          double v2 = 0.0);
// Value of the unknown coordinate (coord = 0 or 1) in `p`.
double true_value(const SystemParams& p, Unknown which, int coord = 0);

struct ParamSpec {
    Unknown which = Unknown::F;
    double alpha = 0.0;   // lower bound of the (first) unknown coordinate
    double beta = 0.0;    // upper bound
    double alpha2 = 0.0;  // bounds of the second coordinate (pair cases)
    double beta2 = 0.0;
    double delta = 0.6;   // learning exponent: K = floor(T^delta)

    // alpha < beta, 0 outside [alpha, beta], f-coordinate bounds positive,
    // delta in (1/3, 1).  The one-step construction further restricts delta
    // to (1/2, 1) and the two-step construction to (1/3, 1/2].
    void validate() const;
};

struct PhiEval {
    double value;
    double derivative;  // d(value)/d(theta)
};

// Moment map theta -> lim E[(X_k - X_{k-1})^2] over unit-spaced increments.
// Strictly decreasing for Unknown::F, strictly increasing for B and A.
PhiEval phi(Unknown which, double theta, const SystemParams& p);

// Inverse of phi on [alpha, beta], clipped to the bounds when s is outside
// the attained range.  Cases B and A invert in closed form (square root);
// case F uses bisection.
double invert_phi(Unknown which, double s, double alpha, double beta,
                  const SystemParams& p);

struct REval {
    double r;   // sqrt(theta^2 + a^2 b^2 / sigma^2)
    double dr;  // theta / r
};
REval r_of(double theta, const SystemParams& p);

struct GammaEval {
    double value;       // stationary filtering-error variance
    double derivative;  // d/dtheta
    double second = 0;  // d^2/dtheta^2 (filled for Unknown::F only)
};

// Stationary root of the filtering Riccati equation, per case:
//   F: (sigma^2/a^2) (r(theta) - theta)
//   B: (f sigma^2/a^2) (sqrt(1 + theta^2 a^2/(f^2 sigma^2)) - 1)
//   A: (f sigma^2/theta^2) (sqrt(1 + theta^2 b^2/(f^2 sigma^2)) - 1)
GammaEval gamma_stationary(Unknown which, double theta, const SystemParams& p);

// Time-dependent Riccati solution with gamma(0) = d2 (case-F coefficients:
// theta is the state drift).  Returns the stationary value exactly when
// d2 matches it.
double gamma_transient(double theta, double t, const SystemParams& p);

// Fisher information of the observation model, per case:
//   F: 1/(2 theta) - 2 rdot/(r + theta) + rdot^2/(2 r)
//   B: theta^2 a^4 / (2 sigma^4 A^3),  A = sqrt(f^2 + theta^2 a^2/sigma^2)
//   A: theta^2 b^4 / (2 sigma^4 A^3),  A = sqrt(f^2 + theta^2 b^2/sigma^2)
// Each equals sigma^-2 times the stationary variance of the score factor
// (the parameter derivative of the drift a*m of the observation).
double fisher(Unknown which, double theta, const SystemParams& p);

// Ratio map x -> 2(e^-x - 1 + x)/(e^-x - 1)^2 used by the two-parameter
// moment system; strictly increasing on (0, inf) with limit 1 at 0.
double phi_ratio(double x);
struct PhiRatioInv {
    double x;
    bool clipped_low = false;
    bool clipped_high = false;
};
PhiRatioInv invert_phi_ratio(double q, double alpha, double beta);

// 2x2 matrix, row major.
struct Mat2 {
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0;
    Mat2 inverse() const;
    double det() const { return a11 * a22 - a12 * a21; }
};

namespace math_detail {
// e^-x - 1 + x evaluated without cancellation (series below |x| = 1e-4).
double em1px(double x);
// 1 - e^-x.
double one_minus_exp_neg(double x);
// x - 2(1 - e^-x) + (1 - e^-2x)/2; the variance bracket of the integrated
// OU increment.  Series below |x| = 1e-3.
double integrated_ou_var_bracket(double x);
}  // namespace math_detail

}  // namespace ouest
