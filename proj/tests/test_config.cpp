#include "doctest.h"

#include <random>
#include <string>

#include "ems/config.hpp"
#include "ems/errors.hpp"

using namespace ems;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

} // namespace

TEST_CASE("empty document yields the reference configuration") {
    const RunConfig cfg = parse_config("");
    CHECK(cfg == RunConfig{});
    CHECK(cfg.plant.m == 1.0);
    CHECK(cfg.plant.i0 == 0.8);
    CHECK(cfg.lqg.Q == 5.0 * Matrix::Identity(3, 3));
    CHECK(cfg.lqg.R(0, 0) == 10.0);
    CHECK(cfg.noise.Xi(0, 0) == 5e-4);
    CHECK(cfg.noise.Theta(0, 0) == 1e-7);
    CHECK(cfg.lqi.Q == 5.0 * Matrix::Identity(4, 4));
    CHECK(cfg.lqi.N(0, 0) == 0.0);
    CHECK(cfg.lqi.N(3, 0) == 1.0);
    CHECK(cfg.realization == Realization::companion);
    CHECK(parse_config("# only a comment\n\n   \n") == RunConfig{});
}

TEST_CASE("single override leaves everything else alone") {
    const RunConfig cfg = parse_config("plant.m = 2.0  # heavier body\n");
    RunConfig expected;
    expected.plant.m = 2.0;
    CHECK(cfg == expected);
}

TEST_CASE("every key parses") {
    const RunConfig cfg = parse_config(R"(plant.R_coil = 12
plant.L_coil = 0.3
plant.x0 = 0.02
synthesis.realization = physical
lqg.Q = [[1,0,0],[0,2,0],[0,0,3]]
lqg.R = 4
lqg.xi = 1e-3
lqg.theta = [[2e-7]]
lqi.R = 3
road.shape = step
road.amplitude = 0.02
road.start = 0.5
sim.dt = 0.002
sim.t_final = 4
sim.seed = 99
sim.noise = false
sim.road_gain = 0.5
sim.initial_state = [0.001, 0, 0]
sim.reference.shape = step
sim.reference.amplitude = 1
output.dir = "results dir"
)");
    CHECK(cfg.plant.R_coil == 12.0);
    CHECK(cfg.realization == Realization::physical);
    CHECK(cfg.lqg.Q(2, 2) == 3.0);
    CHECK(cfg.lqg.R(0, 0) == 4.0);
    CHECK(cfg.noise.Xi(0, 0) == 1e-3);
    CHECK(cfg.noise.Theta(0, 0) == 2e-7);
    CHECK(cfg.road.shape == RoadShape::step);
    CHECK(cfg.sim.seed == 99);
    CHECK_FALSE(cfg.sim.noise_on);
    CHECK(cfg.sim.road_gain == 0.5);
    CHECK(cfg.sim.initial_state == std::vector<double>{0.001, 0.0, 0.0});
    CHECK(cfg.sim.reference.shape == RoadShape::step);
    CHECK(cfg.out_dir == "results dir");
}

TEST_CASE("invariant violations name the key") {
    CHECK(contains(error_of("plant.L_coil = -0.2\n"), "plant.L_coil"));
    CHECK(contains(error_of("lqg.theta = 0\n"), "Theta"));
    CHECK(contains(error_of("sim.dt = 0\n"), "sim.dt"));
    CHECK_FALSE(error_of("lqg.Q = [[1,2,0],[0,1,0],[0,0,1]]\n").empty());
    CHECK_FALSE(error_of("lqg.Q = [[1,0],[0,1]]\n").empty());
}

TEST_CASE("syntax errors carry line and column") {
    const std::string missing_eq = error_of("plant.m = 1\nplant.g 9.81\n");
    CHECK(contains(missing_eq, "line 2"));
    CHECK(contains(missing_eq, "column"));

    const std::string bad_json = error_of("{\n  \"plant\": {\"m\": 1,}\n}\n");
    CHECK(contains(bad_json, "line 2"));
    CHECK(contains(bad_json, "column"));
}

TEST_CASE("unknown and duplicate keys are rejected") {
    CHECK(contains(error_of("plant.mass = 1\n"), "unknown key 'plant.mass'"));
    CHECK(contains(error_of("plant.m = 1\nplant.m = 2\n"), "duplicate key"));
    CHECK(contains(error_of("{\"plant\": {\"colour\": 1}}"), "plant.colour"));
}

TEST_CASE("nested JSON is equivalent to dotted keys") {
    const RunConfig a = parse_config(
        R"({"plant": {"m": 1.5}, "sim": {"seed": 4, "reference": {"shape": "step"}}})");
    const RunConfig b =
        parse_config("plant.m = 1.5\nsim.seed = 4\nsim.reference.shape = step\n");
    CHECK(a == b);
    CHECK(a.plant.m == 1.5);
}

TEST_CASE("render then parse is the identity") {
    CHECK(parse_config(render_config(RunConfig{})) == RunConfig{});

    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> d(0.5, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        RunConfig cfg;
        cfg.plant.m = d(rng);
        cfg.plant.R_coil = 10.0 * d(rng);
        cfg.plant.x0 = 0.03 * d(rng);
        cfg.lqg.Q = d(rng) * Matrix::Identity(3, 3);
        cfg.lqg.R(0, 0) = d(rng) / 3.0;
        cfg.noise.Theta(0, 0) = 1e-7 * d(rng);
        cfg.road.amplitude = 0.1 * d(rng);
        cfg.road.shape = trial % 2 == 0 ? RoadShape::step : RoadShape::half_sine_bump;
        cfg.sim.seed = rng();
        cfg.sim.dt = 1e-3 * d(rng);
        cfg.sim.noise_on = trial % 3 != 0;
        cfg.realization = trial % 2 == 0 ? Realization::physical : Realization::companion;
        if (trial % 5 == 0) {
            cfg.sim.initial_state = {d(rng) * 1e-3, 0.0, -d(rng)};
        }
        cfg.out_dir = "out" + std::to_string(trial);
        const std::string text = render_config(cfg);
        CHECK(parse_config(text) == cfg);
        CHECK(render_config(parse_config(text)) == text);
    }
}

TEST_CASE("load_config reports missing files") {
    CHECK_THROWS_AS(load_config("/nonexistent/ems.cfg"), ConfigError);
}
