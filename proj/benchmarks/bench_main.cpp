#include "genrehawkes/attribution.hpp"
#include "genrehawkes/forecast.hpp"
#include "genrehawkes/hawkes.hpp"
#include "genrehawkes/simulate.hpp"
#include "genrehawkes/taggraph.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <string>
#include <vector>

using namespace genrehawkes;

namespace {

const HawkesParams kParams{0.5, 0.8, 1.2};

std::vector<double> stream_of_size(std::int64_t n) {
    const double T = static_cast<double>(n) / kParams.stationary_rate();
    return simulate_hawkes(kParams, {1, 0.0, T});
}

// Reference O(n^2) evaluation, to show the gap the recursion closes.
double direct_loglik(const HawkesParams& p, const std::vector<double>& t, double T) {
    double ll = -p.mu * T;
    for (std::size_t j = 0; j < t.size(); ++j) {
        double lambda = p.mu;
        for (std::size_t i = 0; i < j; ++i) lambda += p.beta * std::exp(-p.omega * (t[j] - t[i]));
        ll += std::log(lambda) - p.beta / p.omega * (1.0 - std::exp(-p.omega * (T - t[j])));
    }
    return ll;
}

void BM_LoglikRecursive(benchmark::State& state) {
    const auto t = stream_of_size(state.range(0));
    const double T = t.back();
    for (auto _ : state) benchmark::DoNotOptimize(log_likelihood(kParams, t, T));
    state.SetComplexityN(static_cast<std::int64_t>(t.size()));
}
BENCHMARK(BM_LoglikRecursive)->RangeMultiplier(4)->Range(256, 65536)->Complexity(benchmark::oN);

void BM_LoglikDirect(benchmark::State& state) {
    const auto t = stream_of_size(state.range(0));
    const double T = t.back();
    for (auto _ : state) benchmark::DoNotOptimize(direct_loglik(kParams, t, T));
    state.SetComplexityN(static_cast<std::int64_t>(t.size()));
}
BENCHMARK(BM_LoglikDirect)->RangeMultiplier(4)->Range(256, 4096)->Complexity(benchmark::oNSquared);

void BM_LoglikGradient(benchmark::State& state) {
    const auto t = stream_of_size(state.range(0));
    const double T = t.back();
    for (auto _ : state) benchmark::DoNotOptimize(log_likelihood_gradient(kParams, t, T));
}
BENCHMARK(BM_LoglikGradient)->Arg(5000);

void BM_FitHawkes(benchmark::State& state) {
    const auto t = stream_of_size(state.range(0));
    const double T = t.back();
    for (auto _ : state) benchmark::DoNotOptimize(fit_hawkes(t, T));
}
BENCHMARK(BM_FitHawkes)->Arg(1000)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_SimulateHawkes(benchmark::State& state) {
    const double T = static_cast<double>(state.range(0)) / kParams.stationary_rate();
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(simulate_hawkes(kParams, {seed++, 0.0, T}));
}
BENCHMARK(BM_SimulateHawkes)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_McForecast(benchmark::State& state) {
    const auto history = stream_of_size(500);
    const double t = history.back();
    const auto threads = static_cast<unsigned>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(mc_expected_count(kParams, history, t, 14.0, 1000, 3, threads));
}
BENCHMARK(BM_McForecast)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond)->UseRealTime();

EventStream tagged_stream(std::int64_t n) {
    std::vector<Event> ev;
    std::uint64_t x = 12345;
    for (std::int64_t i = 0; i < n; ++i) {
        std::vector<std::string> tags;
        for (int k = 0; k < 4; ++k) {
            x = x * 6364136223846793005ULL + 1442695040888963407ULL;
            tags.push_back("t" + std::to_string((x >> 33) % 400));
        }
        ev.push_back({"v" + std::to_string(i), static_cast<double>(i) * 0.01, "u" + std::to_string(i % 50), tags, 10,
                      1});
    }
    return EventStream(0.0, std::move(ev), static_cast<double>(n) * 0.01);
}

void BM_BuildAffinityGraph(benchmark::State& state) {
    const auto s = tagged_stream(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(build_affinity_graph(s));
}
BENCHMARK(BM_BuildAffinityGraph)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_ConnectedComponents(benchmark::State& state) {
    const auto g = prune_graph(build_affinity_graph(tagged_stream(100000)), state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(connected_components(g));
}
BENCHMARK(BM_ConnectedComponents)->Arg(1)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_AttributionPairs(benchmark::State& state) {
    const auto t = stream_of_size(state.range(0));
    std::vector<Event> ev;
    for (std::size_t i = 0; i < t.size(); ++i) {
        ev.push_back({"v" + std::to_string(i), t[i], "u" + std::to_string(i % 7), {"x"}, 10 + static_cast<std::int64_t>(i % 13), 2});
    }
    const GenreCluster cluster{0, {"x"}, EventStream(0.0, std::move(ev), t.back())};
    const PopularityIndex idx(cluster.events, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(accumulate_pair_scores(cluster, kParams, &idx));
}
BENCHMARK(BM_AttributionPairs)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
