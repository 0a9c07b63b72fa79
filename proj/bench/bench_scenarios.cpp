// Serial reference vs OpenMP scenario runner on a bump-duration sweep.

#include <benchmark/benchmark.h>

#include "ems/batch.hpp"
#include "ems/commands.hpp"

namespace {

std::vector<ems::Scenario> sweep(const ems::RunConfig& cfg, int count) {
    const ems::LqgDesign lqg = ems::design_lqg(cfg);
    const ems::LqiDesign lqi = ems::design_lqi(cfg);
    std::vector<ems::Scenario> out;
    for (int i = 0; i < count; ++i) {
        ems::RoadProfile road = cfg.road;
        road.duration = 0.25 + 0.25 * (i / 3);
        const int kind = i % 3;
        ems::Compensator comp = ems::OpenLoop{};
        if (kind == 1) {
            comp = lqg.compensator;
        } else if (kind == 2) {
            comp = lqi.compensator;
        }
        out.push_back({"s" + std::to_string(i), comp, road});
    }
    return out;
}

template <bool Parallel>
void BM_Scenarios(benchmark::State& state) {
    ems::RunConfig cfg;
    const auto scenarios = sweep(cfg, static_cast<int>(state.range(0)));
    const ems::StateSpace plant = ems::design_plant(cfg.plant, cfg.realization);
    for (auto _ : state) {
        auto out = Parallel ? ems::run_scenarios_parallel(plant, scenarios, cfg.noise, cfg.sim)
                            : ems::run_scenarios_serial(plant, scenarios, cfg.noise, cfg.sim);
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(BM_Scenarios<false>)->Name("serial")->Arg(6)->Arg(24)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Scenarios<true>)->Name("openmp")->Arg(6)->Arg(24)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
