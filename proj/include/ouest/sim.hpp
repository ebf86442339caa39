#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ouest/model.hpp"

namespace ouest {

enum class Scheme { Exact, Euler };

const char* to_string(Scheme s);
Scheme scheme_from_string(std::string_view s);

struct SimConfig {
    double dt = 0.01;
    double horizon_T = 0.0;
    std::uint64_t seed = 1;
    Scheme scheme = Scheme::Exact;
    bool record_latent = false;

    void validate() const;
    long n_steps() const;  // horizon_T / dt, must be integral
};

// One discretized realization of the observation (and optionally the hidden
// state) on the uniform grid t_k = k * dt.  Immutable after creation.
struct SamplePath {
    double dt = 0.0;
    long n_steps = 0;
    std::vector<double> X;  // size n_steps + 1, X[0] = 0
    std::vector<double> Y;  // empty unless latent recording was requested
    std::uint64_t seed = 0;
    SystemParams params_used;

    double horizon() const { return dt * static_cast<double>(n_steps); }
    double time_at(long k) const { return dt * static_cast<double>(k); }
};

// Draws a path of the system.  The exact scheme samples the jointly Gaussian
// triple (Y_{t+dt}, int_t^{t+dt} Y ds, dW) from the OU transition law, so the
// recorded grid values have the exact joint distribution for any dt.  The
// Euler scheme uses first-order increments.  Deterministic in (seed, cfg, p).
SamplePath simulate(const SystemParams& p, const SimConfig& cfg);

// Discrete quadratic-variation estimator of sigma^2: (1/T) sum (dX)^2.
// Carries an O(dt) bias a^2 E[Y^2] dt from the integrated state.
double sigma2_hat(const SamplePath& path);

// CSV export/import, header "t,X[,Y]", full double precision.
void write_path_csv(std::ostream& os, const SamplePath& path);
SamplePath read_path_csv(std::istream& is, const SystemParams& params_used,
                         std::uint64_t seed = 0);

}  // namespace ouest
