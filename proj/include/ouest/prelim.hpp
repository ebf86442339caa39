#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "ouest/model.hpp"
#include "ouest/sim.hpp"

namespace ouest {

enum class ClipSide { None, Lower, Upper };
const char* to_string(ClipSide c);

struct PrelimResult {
    Unknown which = Unknown::F;
    double theta1 = 0;
    double theta2 = 0;      // pair cases
    long K = 0;             // number of unit-spaced increments used
    double stat_S = 0;
    double stat_R = std::nan("");  // pair cases only
    ClipSide clipped1 = ClipSide::None;
    ClipSide clipped2 = ClipSide::None;

    bool clipped() const {
        return clipped1 != ClipSide::None || clipped2 != ClipSide::None;
    }
    std::string to_json(std::uint64_t seed = 0) const;
};

// Mean squared unit-spaced increment (1/K) sum_{k=1..K} (X_k - X_{k-1})^2.
// Requires an integral number of grid steps per unit time.
double stat_S(const SamplePath& path, long K);

// Lag-one increment products (1/K) sum_{k=2..K} (X_k - X_{k-1})(X_{k-1} - X_{k-2}).
double stat_R(const SamplePath& path, long K);

// Moment estimator of the scalar unknown from the learning segment
// [0, T^delta]: inverts the increment-variance map with clipping to
// [alpha, beta].  K = floor(T^delta).
PrelimResult prelim_1d(const SamplePath& path, const ParamSpec& spec,
                       const SystemParams& p);

// Same inversion from an externally supplied statistic value.
PrelimResult prelim_from_stat(double S, long K, const ParamSpec& spec,
                              const SystemParams& p);

// Two-parameter moment estimator: the increment-correlation ratio
// (S - sigma^2)/R identifies f, then S identifies the second coordinate.
PrelimResult prelim_2d(const SamplePath& path, const ParamSpec& spec,
                       const SystemParams& p);

PrelimResult prelim_2d_from_stats(double S, double R, long K,
                                  const ParamSpec& spec,
                                  const SystemParams& p);

}  // namespace ouest
