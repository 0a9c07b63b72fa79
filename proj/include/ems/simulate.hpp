#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ems/numerics.hpp"
#include "ems/plant.hpp"
#include "ems/synthesis.hpp"

namespace ems {

enum class RoadShape { zero, step, half_sine_bump };

std::string to_string(RoadShape s);
std::optional<RoadShape> parse_road_shape(const std::string& s);

struct RoadProfile {
    RoadShape shape = RoadShape::half_sine_bump;
    double amplitude = 0.1;  // m
    double start = 1.0;      // s
    double duration = 1.0;   // s, bump only

    void validate() const;
    bool operator==(const RoadProfile&) const = default;
};

double road_value(const RoadProfile& profile, double t);

struct SimConfig {
    double dt = 1e-3;
    double t_final = 10.0;
    std::uint64_t seed = 1;
    bool noise_on = true;
    /// Plant initial state; empty means zero.
    std::vector<double> initial_state;
    /// Gain from road displacement to the plant input channel.
    double road_gain = 1.0;
    /// Tracking reference r(t) seen by the LQI integrator.
    RoadProfile reference{RoadShape::zero, 0.0, 0.0, 1.0};

    void validate() const;
    bool operator==(const SimConfig&) const = default;
};

/// floor(t_final / dt) + 1, robust to the rounding of t_final / dt.
std::size_t sample_count(double dt, double t_final);

struct SimTrace {
    std::vector<double> t;
    std::vector<double> road;
    std::vector<Vector> states;
    std::vector<double> y;           // noise-free body travel C x
    std::vector<double> y_measured;  // y plus measurement noise
    std::vector<double> u;
    std::vector<Vector> controller_states;
    std::vector<std::string> state_labels;
    Realization realization = Realization::companion;

    std::size_t size() const { return t.size(); }
};

using Derivative = std::function<Vector(double t, const Vector& x)>;
/// Called at every sample k (t = k dt) before the step leaving it.
using SampleObserver = std::function<void(std::size_t k, double t, const Vector& x)>;

struct Trajectory {
    std::vector<double> t;
    std::vector<Vector> x;
};

/// Classical fixed-step fourth-order Runge–Kutta.
Trajectory integrate_rk4(const Derivative& f, const Vector& x0, double dt, double t_final,
                         const SampleObserver& observer = {});

/// Runs plant + compensator against the road profile. Noise is drawn only
/// when cfg.noise_on is set and a noise model is supplied.
SimTrace simulate_closed_loop(const StateSpace& plant, const Compensator& comp,
                              const RoadProfile& profile, const std::optional<NoiseModel>& nm,
                              const SimConfig& cfg);

/// max_k |y_k| of the noise-free output.
double peak_body_travel(const SimTrace& trace);

/// Autonomous matrix of the interconnection (plant states first).
Matrix closed_loop_matrix(const StateSpace& plant, const Compensator& comp);

} // namespace ems
