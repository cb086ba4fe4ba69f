#pragma once

#include <limits>
#include <string>
#include <vector>

#include "csmri/denoise.hpp"

namespace csmri {

inline constexpr double kNoMetric = std::numeric_limits<double>::quiet_NaN();

// One completed iteration. Ground-truth metrics stay NaN/empty when no ground
// truth was supplied.
struct IterationRecord {
    int iter = 0;
    double nmse_db = kNoMetric;
    SubbandVector subband_nmse_db;  // of the denoiser input r_k
    SubbandVector tau;              // per-subband variance estimate used by the denoiser
    SubbandVector tau_nmse_db;      // NMSE predicted from tau
    SubbandVector threshold;
    SubbandVector alpha;
    double seconds = 0.0;  // algorithm time of this iteration, metrics excluded
    bool alpha_clamped = false;
};

struct RunTrace {
    std::string algorithm;
    double precompute_seconds = 0.0;
    std::vector<IterationRecord> records;
};

}  // namespace csmri
