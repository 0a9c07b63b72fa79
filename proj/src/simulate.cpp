#include "ems/simulate.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "ems/errors.hpp"

namespace ems {

namespace {

constexpr double kDivergenceNorm = 1e6;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

bool has_nonzero(const Matrix& m) { return m.size() > 0 && m.cwiseAbs().maxCoeff() != 0.0; }

void check_interconnection(const StateSpace& plant, const Compensator& comp) {
    plant.validate();
    if (!plant.is_siso()) {
        throw DimensionError("closed-loop simulation needs a SISO plant");
    }
    const Eigen::Index n = plant.states();
    std::visit(overloaded{
                   [](const OpenLoop&) {},
                   [&](const DynamicCompensator& c) {
                       const Eigen::Index nc = c.A_c.rows();
                       if (c.A_c.cols() != nc || c.B_c.rows() != nc || c.B_c.cols() != 1 ||
                           c.C_c.rows() != 1 || c.C_c.cols() != nc || c.D_c.rows() != 1 ||
                           c.D_c.cols() != 1) {
                           throw DimensionError("compensator realization does not match plant");
                       }
                       if (has_nonzero(plant.D) && has_nonzero(c.D_c)) {
                           throw DomainError("algebraic loop: plant D and compensator D_c both nonzero");
                       }
                   },
                   [&](const IntegralStateFeedback& c) {
                       if (c.K.rows() != 1 || c.K.cols() != n + 1) {
                           throw DimensionError("LQI gain must be 1 x (n + 1)");
                       }
                   },
               },
               comp);
}

Eigen::Index controller_order(const Compensator& comp) {
    return std::visit(overloaded{
                          [](const OpenLoop&) -> Eigen::Index { return 0; },
                          [](const DynamicCompensator& c) { return c.A_c.rows(); },
                          [](const IntegralStateFeedback&) -> Eigen::Index { return 1; },
                      },
                      comp);
}

} // namespace

std::string to_string(RoadShape s) {
    switch (s) {
    case RoadShape::zero:
        return "zero";
    case RoadShape::step:
        return "step";
    case RoadShape::half_sine_bump:
        return "half_sine_bump";
    }
    return "zero";
}

std::optional<RoadShape> parse_road_shape(const std::string& s) {
    if (s == "zero") {
        return RoadShape::zero;
    }
    if (s == "step") {
        return RoadShape::step;
    }
    if (s == "half_sine_bump" || s == "bump") {
        return RoadShape::half_sine_bump;
    }
    return std::nullopt;
}

void RoadProfile::validate() const {
    if (!std::isfinite(amplitude)) {
        throw DomainError("road.amplitude must be finite");
    }
    if (!std::isfinite(start) || start < 0.0) {
        throw DomainError("road.start must be finite and >= 0");
    }
    if (shape == RoadShape::half_sine_bump && !(duration > 0.0 && std::isfinite(duration))) {
        throw DomainError("road.duration must be > 0 for a bump");
    }
}

double road_value(const RoadProfile& profile, double t) {
    switch (profile.shape) {
    case RoadShape::zero:
        return 0.0;
    case RoadShape::step:
        return t >= profile.start ? profile.amplitude : 0.0;
    case RoadShape::half_sine_bump:
        if (t < profile.start || t > profile.start + profile.duration) {
            return 0.0;
        }
        return profile.amplitude * std::sin(std::numbers::pi * (t - profile.start) / profile.duration);
    }
    return 0.0;
}

void SimConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw DomainError("sim.dt must be > 0");
    }
    if (!(t_final >= dt) || !std::isfinite(t_final)) {
        throw DomainError("sim.t_final must be >= sim.dt");
    }
    if (!std::isfinite(road_gain)) {
        throw DomainError("sim.road_gain must be finite");
    }
    for (double v : initial_state) {
        if (!std::isfinite(v)) {
            throw DomainError("sim.initial_state must be finite");
        }
    }
    reference.validate();
}

std::size_t sample_count(double dt, double t_final) {
    return static_cast<std::size_t>(std::floor(t_final / dt + 1e-9)) + 1;
}

Trajectory integrate_rk4(const Derivative& f, const Vector& x0, double dt, double t_final,
                         const SampleObserver& observer) {
    if (!(dt > 0.0)) {
        throw DomainError("integration step must be > 0");
    }
    const std::size_t samples = sample_count(dt, t_final);
    Trajectory out;
    out.t.reserve(samples);
    out.x.reserve(samples);

    auto eval = [&](double t, const Vector& x) {
        Vector dx = f(t, x);
        if (!dx.allFinite()) {
            throw SimulationDiverged("non-finite derivative", t);
        }
        return dx;
    };

    Vector x = x0;
    for (std::size_t k = 0; k < samples; ++k) {
        // Sample times come from k * dt so rounding does not accumulate.
        const double t = static_cast<double>(k) * dt;
        if (observer) {
            observer(k, t, x);
        }
        out.t.push_back(t);
        out.x.push_back(x);
        if (k + 1 == samples) {
            break;
        }
        const Vector k1 = eval(t, x);
        const Vector k2 = eval(t + 0.5 * dt, x + 0.5 * dt * k1);
        const Vector k3 = eval(t + 0.5 * dt, x + 0.5 * dt * k2);
        const Vector k4 = eval(t + dt, x + dt * k3);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return out;
}

SimTrace simulate_closed_loop(const StateSpace& plant, const Compensator& comp,
                              const RoadProfile& profile, const std::optional<NoiseModel>& nm,
                              const SimConfig& cfg) {
    check_interconnection(plant, comp);
    profile.validate();
    cfg.validate();

    const Eigen::Index n = plant.states();
    const Eigen::Index nc = controller_order(comp);
    const bool noisy = cfg.noise_on && nm.has_value();
    if (noisy) {
        nm->validate();
        if (nm->Xi.rows() != 1 || nm->Theta.rows() != 1) {
            throw DimensionError("noise model must be scalar for a SISO plant");
        }
    }
    const double w_scale = noisy ? std::sqrt(nm->Xi(0, 0) / cfg.dt) : 0.0;
    const double v_scale = noisy ? std::sqrt(nm->Theta(0, 0) / cfg.dt) : 0.0;

    Vector z0 = Vector::Zero(n + nc);
    if (!cfg.initial_state.empty()) {
        if (static_cast<Eigen::Index>(cfg.initial_state.size()) != n) {
            throw DimensionError("sim.initial_state must have one entry per plant state");
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            z0(i) = cfg.initial_state[static_cast<std::size_t>(i)];
        }
    }

    const double d_plant = plant.D(0, 0);
    const Vector b = plant.B.col(0);
    const Eigen::RowVectorXd c = plant.C.row(0);

    // Per-step noise samples, held over the step.
    double w_k = 0.0;
    double v_k = 0.0;

    struct Signals {
        double u;
        double y;
        double y_meas;
    };

    auto signals = [&](const Vector& z, double v) -> Signals {
        const auto x = z.head(n);
        const auto xc = z.tail(nc);
        return std::visit(
            overloaded{
                [&](const OpenLoop&) {
                    const double y = c.dot(x);
                    return Signals{0.0, y, y + v};
                },
                [&](const DynamicCompensator& k) {
                    // D_c and plant D are never both nonzero.
                    const double u_no_dc = -(k.C_c.row(0).dot(xc));
                    const double y_partial = c.dot(x) + d_plant * u_no_dc;
                    const double u = u_no_dc - k.D_c(0, 0) * (y_partial + v);
                    const double y = c.dot(x) + d_plant * u;
                    return Signals{u, y, y + v};
                },
                [&](const IntegralStateFeedback& k) {
                    const double u = -(k.K.row(0).head(n).dot(x) + k.K(0, n) * xc(0));
                    const double y = c.dot(x) + d_plant * u;
                    return Signals{u, y, y + v};
                },
            },
            comp);
    };

    auto derivative = [&](double t, const Vector& z) -> Vector {
        const Signals s = signals(z, v_k);
        Vector dz(n + nc);
        const double drive = s.u + cfg.road_gain * road_value(profile, t) + w_k;
        dz.head(n) = plant.A * z.head(n) + b * drive;
        std::visit(overloaded{
                       [](const OpenLoop&) {},
                       [&](const DynamicCompensator& k) {
                           dz.tail(nc) = k.A_c * z.tail(nc) + k.B_c.col(0) * s.y_meas;
                       },
                       [&](const IntegralStateFeedback&) {
                           dz(n) = road_value(cfg.reference, t) - s.y;
                       },
                   },
                   comp);
        return dz;
    };

    SimTrace trace;
    trace.state_labels = plant.state_labels;
    trace.realization = plant.realization;
    const std::size_t samples = sample_count(cfg.dt, cfg.t_final);
    trace.t.reserve(samples);
    trace.road.reserve(samples);
    trace.states.reserve(samples);
    trace.y.reserve(samples);
    trace.y_measured.reserve(samples);
    trace.u.reserve(samples);
    trace.controller_states.reserve(samples);

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    auto observer = [&](std::size_t, double t, const Vector& z) {
        if (!z.allFinite() || z.norm() > kDivergenceNorm) {
            throw SimulationDiverged("closed-loop state norm exceeded 1e6", t);
        }
        if (noisy) {
            w_k = w_scale * normal(rng);
            v_k = v_scale * normal(rng);
        }
        const Signals s = signals(z, v_k);
        trace.t.push_back(t);
        trace.road.push_back(road_value(profile, t));
        trace.states.push_back(z.head(n));
        trace.y.push_back(s.y);
        trace.y_measured.push_back(s.y_meas);
        trace.u.push_back(s.u);
        trace.controller_states.push_back(z.tail(nc));
    };

    integrate_rk4(derivative, z0, cfg.dt, cfg.t_final, observer);
    return trace;
}

double peak_body_travel(const SimTrace& trace) {
    if (trace.y.empty()) {
        throw DomainError("peak of an empty trace is undefined");
    }
    double peak = 0.0;
    for (double y : trace.y) {
        peak = std::max(peak, std::abs(y));
    }
    return peak;
}

Matrix closed_loop_matrix(const StateSpace& plant, const Compensator& comp) {
    check_interconnection(plant, comp);
    const Eigen::Index n = plant.states();
    const Matrix& a = plant.A;
    const Matrix& b = plant.B;
    const Matrix& c = plant.C;
    const Matrix& d = plant.D;
    return std::visit(
        overloaded{
            [&](const OpenLoop&) -> Matrix { return a; },
            [&](const DynamicCompensator& k) -> Matrix {
                const Eigen::Index nc = k.A_c.rows();
                Matrix out(n + nc, n + nc);
                // u = -(C_c x_c + D_c y), y = C x + D u with D D_c = 0.
                const Matrix y_x = c - d * k.D_c * c;  // dy/dx
                const Matrix y_xc = -d * k.C_c;         // dy/dx_c
                out.topLeftCorner(n, n) = a - b * k.D_c * c;
                out.topRightCorner(n, nc) = -b * k.C_c;
                out.bottomLeftCorner(nc, n) = k.B_c * y_x;
                out.bottomRightCorner(nc, nc) = k.A_c + k.B_c * y_xc;
                return out;
            },
            [&](const IntegralStateFeedback& k) -> Matrix {
                Matrix a_aug = Matrix::Zero(n + 1, n + 1);
                a_aug.topLeftCorner(n, n) = a;
                a_aug.bottomLeftCorner(1, n) = -c;
                Matrix b_aug = Matrix::Zero(n + 1, 1);
                b_aug.topRows(n) = b;
                Matrix out = a_aug - b_aug * k.K;
                // x_i' = -(C x + D u) with u = -K z.
                out.bottomRows(1) += d * k.K;
                return out;
            },
        },
        comp);
}

} // namespace ems
