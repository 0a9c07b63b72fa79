#include "ems/synthesis.hpp"

#include <cmath>

#include "ems/errors.hpp"
#include "ems/simulate.hpp"

namespace ems {

namespace {

Matrix block2(const Matrix& tl, const Matrix& tr, const Matrix& bl, const Matrix& br) {
    Matrix out(tl.rows() + bl.rows(), tl.cols() + tr.cols());
    out << tl, tr, bl, br;
    return out;
}

void check_joint_psd(const Matrix& a, const Matrix& cross, const Matrix& b, const char* what) {
    const Matrix joint = block2(a, cross, cross.transpose(), b);
    const double scale = std::max(1.0, joint.norm());
    if (min_symmetric_eigenvalue(joint) < -1e-10 * scale) {
        throw WeightError(std::string(what) + " is not positive semidefinite");
    }
}

} // namespace

void LqWeights::validate() const {
    require_square(Q, "Q");
    require_square(R, "R");
    require_finite(Q, "Q");
    require_finite(R, "R");
    require_finite(N, "N");
    if (N.rows() != Q.rows() || N.cols() != R.rows()) {
        throw DimensionError("cross weight N must be states x inputs");
    }
    if (!is_symmetric(Q, 1e-10) || min_symmetric_eigenvalue(Q) < -1e-10 * std::max(1.0, Q.norm())) {
        throw WeightError("Q must be symmetric positive semidefinite");
    }
    if (!is_symmetric(R, 1e-10) || min_symmetric_eigenvalue(R) <= 0.0) {
        throw WeightError("R must be symmetric positive definite");
    }
    check_joint_psd(Q, N, R, "weight block [[Q, N], [N', R]]");
}

void NoiseModel::validate() const {
    require_square(Xi, "Xi");
    require_square(Theta, "Theta");
    require_finite(Xi, "Xi");
    require_finite(Theta, "Theta");
    require_finite(N_f, "N_f");
    if (N_f.rows() != Xi.rows() || N_f.cols() != Theta.rows()) {
        throw DimensionError("noise cross intensity N_f must be inputs x outputs");
    }
    if (!is_symmetric(Xi, 1e-10) || min_symmetric_eigenvalue(Xi) < 0.0) {
        throw WeightError("Xi must be symmetric positive semidefinite");
    }
    if (!is_symmetric(Theta, 1e-10) || min_symmetric_eigenvalue(Theta) <= 0.0) {
        throw WeightError("Theta must be symmetric positive definite");
    }
    check_joint_psd(Xi, N_f, Theta, "noise block [[Xi, N_f], [N_f', Theta]]");
}

LqrSolution solve_lqr(const Matrix& a, const Matrix& b, const LqWeights& w) {
    w.validate();
    if (w.Q.rows() != a.rows() || w.R.rows() != b.cols()) {
        throw DimensionError("weights do not match the plant dimensions");
    }
    LqrSolution sol;
    sol.P = solve_care(a, b, w.Q, w.R, w.N);
    sol.K = w.R.llt().solve(b.transpose() * sol.P + w.N.transpose());
    return sol;
}

Matrix lqr_gain(const StateSpace& ss, const LqWeights& w) {
    ss.validate();
    return solve_lqr(ss.A, ss.B, w).K;
}

KalmanSolution solve_kalman(const StateSpace& ss, const NoiseModel& nm) {
    ss.validate();
    nm.validate();
    if (nm.Xi.rows() != ss.inputs() || nm.Theta.rows() != ss.outputs()) {
        throw DimensionError("noise model does not match the plant input/output count");
    }
    if (!is_detectable(ss.A, ss.C)) {
        throw SynthesisError("pair (A, C) is not detectable");
    }
    const Matrix q = ss.B * nm.Xi * ss.B.transpose();
    const Matrix cross = ss.B * nm.N_f;
    KalmanSolution sol;
    sol.P = solve_care(ss.A.transpose(), ss.C.transpose(), 0.5 * (q + q.transpose()), nm.Theta,
                       cross);
    sol.K = nm.Theta.llt().solve(ss.C * sol.P + cross.transpose()).transpose();
    return sol;
}

Matrix kalman_gain(const StateSpace& ss, const NoiseModel& nm) { return solve_kalman(ss, nm).K; }

DynamicCompensator build_lqg(const StateSpace& ss, const Matrix& k_c, const Matrix& k_f) {
    ss.validate();
    const Eigen::Index n = ss.states();
    if (k_c.rows() != ss.inputs() || k_c.cols() != n || k_f.rows() != n ||
        k_f.cols() != ss.outputs()) {
        throw DimensionError("LQG gains do not match the plant dimensions");
    }
    DynamicCompensator comp;
    comp.A_c = ss.A - k_f * ss.C - ss.B * k_c + k_f * ss.D * k_c;
    comp.B_c = k_f;
    comp.C_c = k_c;
    comp.D_c = Matrix::Zero(ss.inputs(), ss.outputs());
    return comp;
}

AugmentedPlant augment_with_integrator(const StateSpace& ss) {
    ss.validate();
    if (!ss.is_siso()) {
        throw DimensionError("integral augmentation is implemented for SISO plants");
    }
    const Eigen::Index n = ss.states();
    AugmentedPlant aug;
    aug.A = Matrix::Zero(n + 1, n + 1);
    aug.A.topLeftCorner(n, n) = ss.A;
    aug.A.bottomLeftCorner(1, n) = -ss.C;
    aug.B = Matrix::Zero(n + 1, 1);
    aug.B.topRows(n) = ss.B;
    return aug;
}

IntegralStateFeedback lqi_gain(const StateSpace& ss, const LqWeights& augmented) {
    const AugmentedPlant aug = augment_with_integrator(ss);
    if (augmented.Q.rows() != aug.A.rows()) {
        throw DimensionError("LQI weights must be sized for n + 1 states");
    }
    return IntegralStateFeedback{solve_lqr(aug.A, aug.B, augmented).K};
}

double lqg_cost(const SimTrace& trace, const LqWeights& w) {
    if (trace.t.empty()) {
        throw DomainError("cost of an empty trace is undefined");
    }
    if (trace.states.size() != trace.t.size() || trace.u.size() != trace.t.size()) {
        throw DimensionError("trace state and input series are not aligned");
    }
    if (trace.t.size() == 1) {
        return 0.0;
    }
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < trace.t.size(); ++k) {
        const Vector& x = trace.states[k];
        if (x.size() != w.Q.rows()) {
            throw DimensionError("trace state does not match weight dimension");
        }
        const double u = trace.u[k];
        const double integrand = x.dot(w.Q * x) + 2.0 * u * x.dot(w.N.col(0)) + u * w.R(0, 0) * u;
        total += integrand * (trace.t[k + 1] - trace.t[k]);
    }
    return total / (trace.t.back() - trace.t.front());
}

Matrix gain_cost_matrix(const Matrix& a, const Matrix& b, const LqWeights& w, const Matrix& k) {
    const Matrix closed = a - b * k;
    const Matrix nk = w.N * k;
    const Matrix q = w.Q - nk - nk.transpose() + k.transpose() * w.R * k;
    return solve_lyapunov(closed, 0.5 * (q + q.transpose()));
}

} // namespace ems
