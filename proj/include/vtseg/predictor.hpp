#pragma once

#include "vtseg/volume.hpp"

#include <cstdint>
#include <utility>
#include <variant>

namespace vtseg {

// Pointwise HU band response: 1 inside [lo, hi], 0 outside, with a linear
// ramp of width `softness` beyond each edge.
struct WindowPredictor {
    double lo = 150.0;
    double hi = 600.0;
    double softness = 0.0;
};

// Replays an externally computed probability volume; predictions are that
// volume restricted to the requested patch location.
struct ProbFilePredictor {
    Volume probabilities;
};

// Ground-truth labels plus seeded, clamped Gaussian noise. The per-patch
// noise stream is derived from (seed, patch start), so results do not depend
// on scheduling.
struct OraclePredictor {
    Volume reference;
    double noise_sd = 0.0;
    std::uint64_t seed = 0;
};

using PredictorSpec = std::variant<WindowPredictor, ProbFilePredictor, OraclePredictor>;

// Classifies one HU patch taken at `location` of the parent volume; returns a
// probability volume with the patch's dims. Output is always within [0, 1].
Volume predict(const PredictorSpec& spec, const Volume& patch, const PatchSpec& location);

// Checks the variant's own invariants, and dims against the target volume
// for the file-backed and oracle variants.
void validate_predictor(const PredictorSpec& spec, const Index3& target_dims);

// Advisory contrast-lumen band estimate: mode of the values above the 95th
// percentile, plus/minus half_width.
std::pair<double, double> suggest_window(const Volume& v, double half_width = 150.0);

} // namespace vtseg
