#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ouest/model.hpp"

namespace ouest {

struct OracleReport {
    std::string quantity;
    double closed_form = 0;
    double oracle_value = 0;
    double abs_err = 0;
    double rel_err = 0;
    double tolerance = 0;
    std::string method;

    bool within_tolerance() const { return rel_err <= tolerance; }
    std::string to_json() const;
};

// Stationary variance b_eff^2 / (2 f_eff) of the hidden state for the given
// case with the unknown set to theta.
double stationary_state_variance(Unknown which, double theta,
                                 const SystemParams& p);

// Brute-force counterpart of phi: adaptive quadrature of the state
// autocovariance over the k-th unit square, times the squared observation
// gain, plus sigma^2.  Uses p.d2 as the initial state variance, so the
// non-stationary remainder is included whenever d2 differs from the
// stationary value.
double quad_phi_oracle(Unknown which, double theta, const SystemParams& p,
                       int k = 1);

// Lag-one counterpart: quadrature over [k-1,k] x [k-2,k-1], times the squared
// observation gain (no sigma^2 term: disjoint observation-noise increments).
double quad_xi_oracle(const SystemParams& p, int k = 2);

// Stationary covariance of the joint (m, mdot) system driven by the
// innovation noise, solved in closed linear-algebraic form; returns the
// implied information sigma^-2 Var(d(c m)/dtheta).
double lyapunov_fisher_oracle(Unknown which, double theta,
                              const SystemParams& p);

// Time-average of the squared score factor along one simulated stationary
// path.
double fisher_mc_oracle(Unknown which, double theta, const SystemParams& p,
                        double T = 1e5, double dt = 0.01,
                        std::uint64_t seed = 20240901);

struct Fisher2x2 {
    Mat2 info;
    bool positive_definite = false;
};

// Numeric 2x2 information matrix for the pair cases: time-average of the
// outer product of the score-gradient vector.  Indefinite output (possible at
// short horizons) is flagged rather than thrown.
Fisher2x2 fisher_matrix_numeric(Unknown which, double theta1, double theta2,
                                const SystemParams& p, double T = 1e5,
                                double dt = 0.01,
                                std::uint64_t seed = 20240902);

// Default closed-form vs oracle comparison table.
std::vector<OracleReport> oracle_table();

}  // namespace ouest
