#include "vtseg/pipeline.hpp"

#include "vtseg/morphology.hpp"
#include "vtseg/tiling.hpp"

#include <chrono>
#include <utility>

namespace vtseg {

void PipelineConfig::validate(const Index3& dims) const
{
    if ((fine_patch > coarse_patch).any())
        throw DomainError("fine_patch must be <= coarse_patch per axis");
    if ((coarse_patch > dims).any())
        throw DomainError("coarse_patch exceeds volume dims");
    if ((fine_patch < 1).any())
        throw DomainError("fine_patch must be positive");
    if ((coarse_stride < 1).any() || (coarse_stride > coarse_patch).any())
        throw DomainError("coarse_stride must satisfy 1 <= stride <= coarse_patch");
    if (!(coarse_threshold > 0.0 && coarse_threshold < 1.0))
        throw DomainError("coarse_threshold must be in (0, 1)");
    if (!(fine_threshold > 0.0 && fine_threshold < 1.0))
        throw DomainError("fine_threshold must be in (0, 1)");
    if (min_component_size < 0)
        throw DomainError("min_component_size must be >= 0");
    if (connectivity3d != 6 && connectivity3d != 26)
        throw DomainError("connectivity3d must be 6 or 26");
    if (connectivity2d != 4 && connectivity2d != 8)
        throw DomainError("connectivity2d must be 4 or 8");
}

NoProposalError::NoProposalError(std::string msg, Volume prob, Volume mask, bool harm,
                                 StageTimings t)
    : Error(std::move(msg)),
      coarse_prob(std::make_shared<const Volume>(std::move(prob))),
      coarse_mask(std::make_shared<const Volume>(std::move(mask))),
      harmonized(harm), timings(t)
{
}

Volume binarize(const Volume& prob, double threshold)
{
    if (prob.kind() != VoxelKind::Probability)
        throw DomainError("binarize expects a probability volume");
    if (!(threshold > 0.0 && threshold < 1.0))
        throw DomainError("binarize threshold must be in (0, 1)");
    GridArray<double> out =
        (prob.data() >= threshold)
            .select(GridArray<double>::Ones(prob.size()), GridArray<double>::Zero(prob.size()));
    return Volume(prob.dims(), prob.spacing(), prob.origin(), VoxelKind::Label, std::move(out));
}

namespace {

class StageClock {
public:
    StageClock() : t0_(std::chrono::steady_clock::now()) {}
    double lap_ms()
    {
        const auto t1 = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(t1 - t0_).count();
        t0_ = t1;
        return ms;
    }

private:
    std::chrono::steady_clock::time_point t0_;
};

} // namespace

Volume refine_probability(const Volume& harmonized_hu, const Volume& coarse_prob,
                          const CenterSet& centers, const PipelineConfig& cfg, int workers)
{
    if (harmonized_hu.kind() != VoxelKind::HU)
        throw DomainError("refine expects an HU volume");
    if (coarse_prob.kind() != VoxelKind::Probability ||
        (coarse_prob.dims() != harmonized_hu.dims()).any())
        throw DomainError("coarse probability volume does not match the input volume");
    validate_predictor(cfg.fine_predictor, harmonized_hu.dims());

    FusionAccumulator fine_acc(harmonized_hu.dims(), harmonized_hu.spacing(),
                               harmonized_hu.origin());
    std::vector<PatchSpec> locations;
    locations.reserve(centers.points.size());
    for (const Index3& c : centers.points)
        locations.push_back(clamp_patch_at(c, cfg.fine_patch, harmonized_hu.dims()));
    predict_and_accumulate(fine_acc, harmonized_hu, cfg.fine_predictor, locations, workers);

    // Fine replaces coarse wherever the fine stage looked; the coarse value
    // survives only outside fine coverage.
    const Volume fine_only = fine_acc.finalize();
    GridArray<double> fused(coarse_prob.size());
    for (std::int64_t i = 0; i < fused.size(); ++i)
        fused[i] = fine_acc.weight()[i] > 0.0 ? fine_only[i] : coarse_prob[i];
    return Volume(harmonized_hu.dims(), harmonized_hu.spacing(), harmonized_hu.origin(),
                  VoxelKind::Probability, std::move(fused));
}

PostprocessResult postprocess(const Volume& fine_prob, const PipelineConfig& cfg)
{
    Volume final_mask = binarize(fine_prob, cfg.fine_threshold);
    const ComponentLabeling components = label_components_3d(final_mask, cfg.connectivity3d);
    int kept = components.count;
    if (cfg.min_component_size > 0) {
        final_mask = filter_components(components, cfg.min_component_size);
        kept = 0;
        for (std::int64_t s : components.sizes)
            if (s >= cfg.min_component_size)
                ++kept;
    }
    return PostprocessResult{std::move(final_mask), kept};
}

PipelineResult run(const Volume& v, const PipelineConfig& cfg, int workers)
{
    if (v.kind() != VoxelKind::HU)
        throw DomainError("pipeline expects an HU volume");
    cfg.validate(v.dims());
    validate_predictor(cfg.coarse_predictor, v.dims());
    validate_predictor(cfg.fine_predictor, v.dims());

    StageTimings timings;
    StageClock clock;

    const Volume harmonized = harmonize(v, cfg.source_tag);
    const bool applied_shift =
        (cfg.source_tag == SourceTag::K || cfg.source_tag == SourceTag::R);
    timings.harmonize_ms = clock.lap_ms();

    Volume coarse_prob =
        run_coarse(harmonized, cfg.coarse_predictor, cfg.coarse_patch, cfg.coarse_stride, workers);
    Volume coarse_mask = binarize(coarse_prob, cfg.coarse_threshold);
    timings.coarse_ms = clock.lap_ms();

    if ((coarse_mask.data() != 0.0).count() == 0)
        throw NoProposalError("coarse stage produced an empty mask (no vessel proposal)",
                              std::move(coarse_prob), std::move(coarse_mask), applied_shift,
                              timings);

    CenterSet dense = pseudo_centerline(coarse_mask, cfg.connectivity2d);
    CenterSet centers = sparsify(dense, cfg.effective_d_min());
    timings.centerline_ms = clock.lap_ms();

    Volume fine_prob = refine_probability(harmonized, coarse_prob, centers, cfg, workers);
    timings.fine_ms = clock.lap_ms();

    PostprocessResult post = postprocess(fine_prob, cfg);
    timings.postprocess_ms = clock.lap_ms();

    PipelineResult result{std::move(coarse_prob),
                          std::move(coarse_mask),
                          std::move(fine_prob),
                          std::move(post.mask),
                          std::move(dense),
                          std::move(centers),
                          timings,
                          applied_shift,
                          post.component_count};
    return result;
}

} // namespace vtseg
