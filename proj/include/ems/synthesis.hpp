#pragma once

#include <variant>

#include "ems/numerics.hpp"
#include "ems/plant.hpp"

namespace ems {

struct SimTrace;

/// Quadratic weights of the cost x'Qx + 2x'N u + u'Ru.
struct LqWeights {
    Matrix Q;
    Matrix R;
    Matrix N;  // states x inputs; zero when absent

    /// Throws WeightError on asymmetry or lost definiteness.
    void validate() const;
};

/// White-noise intensities. Process noise enters through the plant input
/// channel, so Xi is inputs x inputs and the state intensity is B Xi B'.
struct NoiseModel {
    Matrix Xi;
    Matrix Theta;
    Matrix N_f;  // inputs x outputs

    void validate() const;
};

/// Observer-based output feedback u = -(C_c x_c + D_c y),
/// x_c' = A_c x_c + B_c y.
struct DynamicCompensator {
    Matrix A_c;
    Matrix B_c;
    Matrix C_c;
    Matrix D_c;
};

/// u = -K [x; x_i] with integrator x_i' = r - y.
struct IntegralStateFeedback {
    Matrix K;  // 1 x (n + 1)
};

struct OpenLoop {};

using Compensator = std::variant<OpenLoop, DynamicCompensator, IntegralStateFeedback>;

/// K_C = R^{-1} (B'P + N') from the control CARE.
Matrix lqr_gain(const StateSpace& ss, const LqWeights& w);

/// Same gain together with the Riccati solution.
struct LqrSolution {
    Matrix K;
    Matrix P;
};
LqrSolution solve_lqr(const Matrix& a, const Matrix& b, const LqWeights& w);

/// K_f = (P_f C' + B N_f) Theta^{-1} from the filter CARE.
Matrix kalman_gain(const StateSpace& ss, const NoiseModel& nm);

struct KalmanSolution {
    Matrix K;
    Matrix P;
};
KalmanSolution solve_kalman(const StateSpace& ss, const NoiseModel& nm);

/// Combines regulator and estimator gains into the LQG compensator.
DynamicCompensator build_lqg(const StateSpace& ss, const Matrix& k_c, const Matrix& k_f);

/// Integrator-augmented plant [[A, 0], [-C, 0]], [[B], [0]].
struct AugmentedPlant {
    Matrix A;
    Matrix B;
};
AugmentedPlant augment_with_integrator(const StateSpace& ss);

/// Weights sized for the augmented (n + 1) state; N is (n + 1) x 1.
IntegralStateFeedback lqi_gain(const StateSpace& ss, const LqWeights& augmented);

/// Time average (1/T) sum (x'Qx + 2x'N u + u'R u) dt over the trace.
double lqg_cost(const SimTrace& trace, const LqWeights& w);

/// Infinite-horizon cost matrix of u = -K x: solves
/// (A - BK)' P + P (A - BK) + Q - N K - K'N' + K'R K = 0.
Matrix gain_cost_matrix(const Matrix& a, const Matrix& b, const LqWeights& w, const Matrix& k);

} // namespace ems
