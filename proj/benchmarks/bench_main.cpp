#include <accdor/cell_detect.hpp>
#include <accdor/chamber_seg.hpp>
#include <accdor/classifier.hpp>
#include <accdor/imaging.hpp>
#include <accdor/phantom.hpp>
#include <accdor/segmenter.hpp>
#include <accdor/thresholding.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace accdor;

namespace {

const Phantom& phantom() {
    static const Phantom p = generate_phantom(PhantomConfig{}, 42);
    return p;
}

void BM_ConnectedComponents(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    std::mt19937_64 rng(1);
    std::bernoulli_distribution on(0.4);
    BinaryMask mask(side, side);
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) mask.set(r, c, on(rng));
    }
    for (auto _ : state) benchmark::DoNotOptimize(connected_components(mask));
    state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_ConnectedComponents)->Arg(64)->Arg(256)->Arg(512);

void BM_Isodata(benchmark::State& state) {
    const GrayImage& img = phantom().image;
    for (auto _ : state) benchmark::DoNotOptimize(isodata_threshold(img));
}
BENCHMARK(BM_Isodata);

void BM_DetectCandidates(benchmark::State& state) {
    const Phantom& p = phantom();
    for (auto _ : state) benchmark::DoNotOptimize(detect_candidates(p.image, p.truth.chamber_mask, 0.85, CdmConfig{}));
}
BENCHMARK(BM_DetectCandidates);

void BM_MlpForward(benchmark::State& state) {
    const MlpParams params = init_mlp(3);
    Crop crop{20, 20, std::vector<double>(400, 0.3), CropLabel::Unlabeled};
    for (auto _ : state) benchmark::DoNotOptimize(forward(params, crop));
}
BENCHMARK(BM_MlpForward);

void BM_SegmentChamberOracle(benchmark::State& state) {
    OracleSegmenter seg;
    const GrayImage& img = phantom().image;
    for (auto _ : state) benchmark::DoNotOptimize(segment_chamber(img, seg));
}
BENCHMARK(BM_SegmentChamberOracle)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
