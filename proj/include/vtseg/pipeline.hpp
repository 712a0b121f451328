#pragma once

#include "vtseg/centerline.hpp"
#include "vtseg/predictor.hpp"
#include "vtseg/volume.hpp"

#include <memory>
#include <optional>

namespace vtseg {

struct PipelineConfig {
    Size3 coarse_patch{128, 128, 128};
    Size3 coarse_stride{96, 96, 96};
    Size3 fine_patch{64, 64, 64};
    double coarse_threshold = 0.5;
    double fine_threshold = 0.5;
    int d_min = -1; // -1: auto = floor(min(fine_patch) / 2)
    std::int64_t min_component_size = 0;
    int connectivity3d = 26;
    int connectivity2d = 8;
    PredictorSpec coarse_predictor = WindowPredictor{};
    PredictorSpec fine_predictor = WindowPredictor{};
    SourceTag source_tag = SourceTag::Unknown;

    int effective_d_min() const
    {
        return d_min >= 0 ? d_min : fine_patch.minCoeff() / 2;
    }
    void validate(const Index3& dims) const;
};

struct StageTimings {
    double harmonize_ms = 0;
    double coarse_ms = 0;
    double centerline_ms = 0;
    double fine_ms = 0;
    double postprocess_ms = 0;
};

struct PipelineResult {
    Volume coarse_prob;
    Volume coarse_mask;
    Volume fine_prob;  // fine average inside fine coverage, coarse elsewhere
    Volume final_mask;
    CenterSet dense_centers;
    CenterSet centers; // sparsified
    StageTimings timings;
    bool harmonized = false; // provenance: the 1024 shift was applied exactly once
    int final_component_count = 0;
};

// Coarse stage found nothing above threshold. Carries the coarse outputs for
// inspection.
class NoProposalError : public Error {
public:
    NoProposalError(std::string msg, Volume coarse_prob, Volume coarse_mask, bool harmonized,
                    StageTimings timings);

    std::shared_ptr<const Volume> coarse_prob;
    std::shared_ptr<const Volume> coarse_mask;
    bool harmonized = false;
    StageTimings timings;
};

// End-to-end run: harmonize, coarse sliding window, threshold,
// pseudo-centerline, sparsify, fine patches at the sparse centers, fuse
// (fine replaces coarse inside fine coverage), threshold, component filter.
PipelineResult run(const Volume& v, const PipelineConfig& cfg, int workers = 1);

// label = 1 iff probability >= threshold.
Volume binarize(const Volume& prob, double threshold);

// Fine stage in isolation: classify fine patches centered on `centers`,
// average their overlaps, and fall back to coarse_prob outside fine
// coverage. `run` and the staged CLI path share this code, so composing the
// stage commands reproduces `run` exactly.
Volume refine_probability(const Volume& harmonized_hu, const Volume& coarse_prob,
                          const CenterSet& centers, const PipelineConfig& cfg, int workers = 1);

struct PostprocessResult {
    Volume mask;
    int component_count = 0; // components surviving the size filter
};

// Threshold at fine_threshold, then drop components below
// min_component_size.
PostprocessResult postprocess(const Volume& fine_prob, const PipelineConfig& cfg);

} // namespace vtseg
