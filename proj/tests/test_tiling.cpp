#include "vtseg/tiling.hpp"

#include "vtseg/phantom.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace vtseg;

TEST_CASE("plan_tiling axis enumeration")
{
    SUBCASE("dim 100, patch 64, stride 32 -> starts 0, 32, 36")
    {
        const TilingPlan p = plan_tiling(Index3(100, 1, 1), Size3(64, 1, 1), Size3(32, 1, 1));
        std::vector<int> xs;
        for (const PatchSpec& s : p.starts)
            xs.push_back(s.start.x());
        CHECK(xs == std::vector<int>{0, 32, 36});
    }

    SUBCASE("dim equals patch -> single tile")
    {
        const TilingPlan p = plan_tiling(Index3(64, 64, 64), Size3(64, 64, 64), Size3(1, 1, 1));
        REQUIRE(p.starts.size() == 1);
        CHECK((p.starts[0].start == Index3(0, 0, 0)).all());
    }

    SUBCASE("dim 65, patch 64, stride 64 -> starts 0, 1")
    {
        const TilingPlan p = plan_tiling(Index3(65, 1, 1), Size3(64, 1, 1), Size3(64, 1, 1));
        std::vector<int> xs;
        for (const PatchSpec& s : p.starts)
            xs.push_back(s.start.x());
        CHECK(xs == std::vector<int>{0, 1});
    }

    SUBCASE("128^3 with 64^3 tiles at stride 64 -> 8 tiles")
    {
        const TilingPlan p =
            plan_tiling(Index3(128, 128, 128), Size3(64, 64, 64), Size3(64, 64, 64));
        CHECK(p.starts.size() == 8);
    }

    SUBCASE("starts are z-major ascending")
    {
        const TilingPlan p = plan_tiling(Index3(4, 4, 4), Size3(2, 2, 2), Size3(2, 2, 2));
        REQUIRE(p.starts.size() == 8);
        CHECK((p.starts[0].start == Index3(0, 0, 0)).all());
        CHECK((p.starts[1].start == Index3(2, 0, 0)).all());
        CHECK((p.starts[2].start == Index3(0, 2, 0)).all());
        CHECK((p.starts[4].start == Index3(0, 0, 2)).all());
    }

    SUBCASE("every voxel covered, for assorted shapes")
    {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 50; ++trial) {
            auto draw = [&rng](int lo, int hi) { // inclusive
                return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
            };
            const Index3 dims(draw(2, 31), draw(2, 31), draw(2, 31));
            const Size3 patch(draw(1, dims.x()), draw(1, dims.y()), draw(1, dims.z()));
            const Size3 stride(draw(1, patch.x()), draw(1, patch.y()), draw(1, patch.z()));
            const TilingPlan p = plan_tiling(dims, patch, stride);
            GridArray<std::uint8_t> covered = GridArray<std::uint8_t>::Zero(voxel_count(dims));
            for (const PatchSpec& s : p.starts) {
                REQUIRE(s.valid_for(dims));
                for (int z = 0; z < s.size.z(); ++z)
                    for (int y = 0; y < s.size.y(); ++y)
                        for (int x = 0; x < s.size.x(); ++x)
                            covered[linear_index(s.start.x() + x, s.start.y() + y,
                                                 s.start.z() + z, dims)] = 1;
            }
            CHECK((covered == 1).all());
        }
    }

    SUBCASE("rejects bad inputs")
    {
        CHECK_THROWS_AS(plan_tiling(Index3(10, 10, 10), Size3(11, 10, 10), Size3(1, 1, 1)),
                        DomainError);
        CHECK_THROWS_AS(plan_tiling(Index3(10, 10, 10), Size3(5, 5, 5), Size3(0, 1, 1)),
                        DomainError);
        CHECK_THROWS_AS(plan_tiling(Index3(10, 10, 10), Size3(5, 5, 5), Size3(6, 1, 1)),
                        DomainError);
    }
}

TEST_CASE("fusion accumulator averages overlaps")
{
    const Index3 dims(4, 4, 4);
    const Vec3 sp(1, 1, 1), org(0, 0, 0);

    SUBCASE("empty accumulator finalizes to all zeros")
    {
        const FusionAccumulator acc(dims, sp, org);
        const Volume out = acc.finalize();
        CHECK((out.data() == 0.0).all());
        CHECK(out.kind() == VoxelKind::Probability);
    }

    SUBCASE("same patch twice equals the patch")
    {
        FusionAccumulator acc(dims, sp, org);
        const Volume p = Volume::filled(Size3(2, 2, 2), sp, org, VoxelKind::Probability, 0.7);
        const PatchSpec loc{Index3(1, 1, 1), Size3(2, 2, 2)};
        acc.add(p, loc);
        acc.add(p, loc);
        const Volume out = acc.finalize();
        CHECK(out.at(1, 1, 1) == 0.7);
        CHECK(out.at(0, 0, 0) == 0.0);
    }

    SUBCASE("0.2 and 0.8 overlapping average to 0.5")
    {
        FusionAccumulator acc(dims, sp, org);
        const PatchSpec loc{Index3(0, 0, 0), Size3(2, 2, 2)};
        acc.add(Volume::filled(Size3(2, 2, 2), sp, org, VoxelKind::Probability, 0.2), loc);
        acc.add(Volume::filled(Size3(2, 2, 2), sp, org, VoxelKind::Probability, 0.8), loc);
        CHECK(acc.finalize().at(0, 0, 0) == 0.5);
    }

    SUBCASE("non-overlapping patches keep their own values")
    {
        FusionAccumulator acc(dims, sp, org);
        acc.add(Volume::filled(Size3(2, 4, 4), sp, org, VoxelKind::Probability, 0.25),
                PatchSpec{Index3(0, 0, 0), Size3(2, 4, 4)});
        acc.add(Volume::filled(Size3(2, 4, 4), sp, org, VoxelKind::Probability, 0.75),
                PatchSpec{Index3(2, 0, 0), Size3(2, 4, 4)});
        const Volume out = acc.finalize();
        CHECK(out.at(0, 2, 2) == 0.25);
        CHECK(out.at(3, 2, 2) == 0.75);
    }

    SUBCASE("dims mismatch rejected")
    {
        FusionAccumulator acc(dims, sp, org);
        CHECK_THROWS_AS(acc.add(Volume::filled(Size3(2, 2, 2), sp, org, VoxelKind::Probability,
                                               0.5),
                                PatchSpec{Index3(0, 0, 0), Size3(2, 2, 1)}),
                        DomainError);
    }
}

TEST_CASE("run_coarse")
{
    PhantomSpec spec;
    spec.dims = Index3(40, 40, 40);
    spec.seed = 9;
    spec.trunk_radius = 5;
    spec.branch_count = 1;
    spec.noise_sd = 0.0;
    const PhantomPair phantom = generate(spec);
    const WindowPredictor window{150.0, 600.0, 0.0};

    SUBCASE("coverage: weight >= 1 everywhere after a full tiling")
    {
        FusionAccumulator acc(phantom.hu.dims(), phantom.hu.spacing(), phantom.hu.origin());
        const TilingPlan plan = plan_tiling(phantom.hu.dims(), Size3(16, 16, 16),
                                            Size3(12, 12, 12));
        predict_and_accumulate(acc, phantom.hu, PredictorSpec{window}, plan.starts, 1);
        CHECK((acc.weight() >= 1.0).all());
    }

    SUBCASE("pointwise predictor: output independent of patch and stride, equals mask")
    {
        const Volume a = run_coarse(phantom.hu, window, Size3(16, 16, 16), Size3(12, 12, 12));
        const Volume b = run_coarse(phantom.hu, window, Size3(40, 40, 40), Size3(40, 40, 40));
        const Volume c = run_coarse(phantom.hu, window, Size3(17, 23, 9), Size3(5, 7, 3));
        CHECK((a.data() == b.data()).all());
        CHECK((a.data() == c.data()).all());
        CHECK((a.data() == phantom.mask.data()).all());
    }

    SUBCASE("oracle(noise 0) reproduces the ground-truth mask")
    {
        const OraclePredictor oracle_pred{phantom.mask, 0.0, 1};
        const Volume out =
            run_coarse(phantom.hu, oracle_pred, Size3(16, 16, 16), Size3(16, 16, 16));
        CHECK((out.data() == phantom.mask.data()).all());
    }

    SUBCASE("bit-identical across worker counts and accumulation permutations")
    {
        const OraclePredictor noisy{phantom.mask, 0.25, 33};
        const Volume w1 = run_coarse(phantom.hu, noisy, Size3(16, 16, 16), Size3(12, 12, 12), 1);
        const Volume w2 = run_coarse(phantom.hu, noisy, Size3(16, 16, 16), Size3(12, 12, 12), 2);
        const Volume w8 = run_coarse(phantom.hu, noisy, Size3(16, 16, 16), Size3(12, 12, 12), 8);
        CHECK((w1.data() == w2.data()).all());
        CHECK((w1.data() == w8.data()).all());

        // canonical-order accumulation equals any explicit permutation
        const TilingPlan plan =
            plan_tiling(phantom.hu.dims(), Size3(16, 16, 16), Size3(12, 12, 12));
        std::vector<Volume> preds;
        for (const PatchSpec& loc : plan.starts)
            preds.push_back(predict(PredictorSpec{noisy}, extract_patch(phantom.hu, loc), loc));

        FusionAccumulator canonical(phantom.hu.dims(), phantom.hu.spacing(),
                                    phantom.hu.origin());
        for (std::size_t i = 0; i < plan.starts.size(); ++i)
            canonical.add(preds[i], plan.starts[i]);

        std::vector<std::size_t> order(plan.starts.size());
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 rng(5);
        std::shuffle(order.begin(), order.end(), rng);
        FusionAccumulator shuffled(phantom.hu.dims(), phantom.hu.spacing(),
                                   phantom.hu.origin());
        for (std::size_t i : order)
            shuffled.add(preds[i], plan.starts[i]);

        // permuted accumulation of (0/1 +- noise) values can round differently,
        // so the contract is: merge in canonical order. Sanity-check both
        // finalize within fp tolerance, and exactly when weights are integers
        // and values identical.
        const Volume fc = canonical.finalize();
        const Volume fs = shuffled.finalize();
        CHECK((fc.data() - fs.data()).abs().maxCoeff() < 1e-12);
    }
}
