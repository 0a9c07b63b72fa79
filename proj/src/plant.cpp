#include "ems/plant.hpp"

#include <cmath>
#include <string>

#include "ems/errors.hpp"

namespace ems {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string(name) + " must be > 0");
    }
}

} // namespace

void PlantParams::validate() const {
    require_positive(m, "plant.m");
    require_positive(R_coil, "plant.R_coil");
    require_positive(L_coil, "plant.L_coil");
    require_positive(x0, "plant.x0");
    require_positive(D_pot, "plant.D_pot");
    require_positive(E_pot, "plant.E_pot");
    require_positive(k_em, "plant.k_em");
    if (!(i0 >= 0.0) || !std::isfinite(i0)) {
        throw DomainError("plant.i0 must be >= 0");
    }
    if (!std::isfinite(g)) {
        throw DomainError("plant.g must be finite");
    }
    if (mu0 && N_turns && A_pole) {
        const double derived = *mu0 * *N_turns * *N_turns * *A_pole / 2.0;
        if (std::abs(derived - k_em) > 1e-9 * std::abs(k_em)) {
            throw DomainError("plant.k_em must equal mu0*N_turns^2*A_pole/2");
        }
    }
}

std::string to_string(Realization r) {
    return r == Realization::physical ? "physical" : "companion";
}

void StateSpace::validate() const {
    require_square(A, "A");
    const Eigen::Index n = A.rows();
    if (B.rows() != n || C.cols() != n || D.rows() != C.rows() || D.cols() != B.cols()) {
        throw DimensionError("state-space matrices have inconsistent shapes");
    }
    require_finite(A, "A");
    require_finite(B, "B");
    require_finite(C, "C");
    require_finite(D, "D");
    if (state_labels.size() != static_cast<std::size_t>(n)) {
        throw DimensionError("state label count does not match state dimension");
    }
}

Complex TransferFunction::evaluate(Complex s) const {
    auto horner = [s](const std::vector<double>& c) {
        Complex acc = 0.0;
        for (double x : c) {
            acc = acc * s + x;
        }
        return acc;
    };
    return horner(num) / horner(den);
}

double electromagnet_force(double gap, double current, double k_em) {
    if (!(gap > 0.0)) {
        throw DomainError("electromagnet gap must be > 0");
    }
    const double ratio = current / gap;
    return 0.5 * k_em * ratio * ratio;
}

PlantState nonlinear_derivative(const PlantState& z, double voltage, const PlantParams& p) {
    if (!(z[0] > 0.0)) {
        throw DomainError("gap state z1 must be > 0");
    }
    const double accel = p.g - electromagnet_force(z[0], z[2], p.k_em) / p.m;
    const double di = voltage / p.L_coil - z[2] * p.R_coil / p.L_coil;
    return {z[1], accel, di};
}

double equilibrium_residual(const PlantParams& p) {
    return std::abs(p.m * p.g - electromagnet_force(p.x0, p.i0, p.k_em));
}

StateSpace linearize(const PlantParams& p) {
    p.validate();
    StateSpace ss;
    ss.A = Matrix::Zero(3, 3);
    ss.A(0, 1) = 1.0;
    ss.A(1, 0) = -2.0 * p.k_em * p.i0 * p.i0 / (p.m * p.x0 * p.x0 * p.x0);
    ss.A(1, 2) = 2.0 * p.k_em * p.i0 / (p.m * p.x0 * p.x0);
    ss.A(2, 2) = -p.R_coil / p.L_coil;
    ss.B = Matrix::Zero(3, 1);
    ss.B(2, 0) = p.E_pot / (p.L_coil * p.D_pot);
    ss.C = Matrix::Zero(1, 3);
    ss.C(0, 0) = 1.0;
    ss.D = Matrix::Zero(1, 1);
    ss.realization = Realization::physical;
    ss.state_labels = {"gap", "velocity", "current"};
    return ss;
}

Matrix finite_difference_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& z,
                                  double h) {
    if (!(h > 0.0)) {
        throw DomainError("finite-difference step must be > 0");
    }
    Matrix jac;
    for (Eigen::Index col = 0; col < z.size(); ++col) {
        Vector up = z;
        Vector down = z;
        up(col) += h;
        down(col) -= h;
        const Vector diff = (f(up) - f(down)) / (2.0 * h);
        if (col == 0) {
            jac.resize(diff.size(), z.size());
        }
        jac.col(col) = diff;
    }
    return jac;
}

Matrix finite_difference_jacobian(const PlantState& z, double voltage, const PlantParams& p,
                                  double h) {
    if (!(h > 0.0)) {
        throw DomainError("finite-difference step must be > 0");
    }
    if (!(z[0] - h > 0.0)) {
        throw DomainError("finite-difference stencil crosses gap = 0");
    }
    auto field = [&](const Vector& v) {
        const PlantState d = nonlinear_derivative({v(0), v(1), v(2)}, voltage, p);
        return Vector{{d[0], d[1], d[2]}};
    };
    return finite_difference_jacobian(field, Vector{{z[0], z[1], z[2]}}, h);
}

std::vector<double> char_poly(const Matrix& a) {
    require_square(a, "char_poly input");
    // Expand prod (s - lambda_i) over the spectrum.
    std::vector<Complex> coeffs{1.0};
    for (const Complex& l : eig(a)) {
        coeffs.push_back(0.0);
        for (std::size_t k = coeffs.size() - 1; k > 0; --k) {
            coeffs[k] -= l * coeffs[k - 1];
        }
    }
    std::vector<double> out;
    out.reserve(coeffs.size());
    for (const Complex& c : coeffs) {
        out.push_back(c.real());
    }
    return out;
}

StateSpace to_companion(const TransferFunction& tf) {
    if (tf.den.size() < 2 || tf.den.front() != 1.0) {
        throw DomainError("companion form needs a monic denominator of degree >= 1");
    }
    if (!tf.is_strictly_proper()) {
        throw DomainError("companion form needs a strictly proper transfer function");
    }
    const auto n = static_cast<Eigen::Index>(tf.order());
    StateSpace ss;
    ss.A = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        ss.A(0, j) = -tf.den[static_cast<std::size_t>(j) + 1];
    }
    for (Eigen::Index i = 1; i < n; ++i) {
        ss.A(i, i - 1) = 1.0;
    }
    ss.B = Matrix::Zero(n, 1);
    ss.B(0, 0) = 1.0;
    // x_1 carries the highest derivative, so the numerator coefficient of
    // s^k lands in column n-1-k.
    ss.C = Matrix::Zero(1, n);
    const std::size_t offset = static_cast<std::size_t>(n) - tf.num.size();
    for (std::size_t k = 0; k < tf.num.size(); ++k) {
        ss.C(0, static_cast<Eigen::Index>(offset + k)) = tf.num[k];
    }
    ss.D = Matrix::Zero(1, 1);
    ss.realization = Realization::companion;
    for (Eigen::Index i = 0; i < n; ++i) {
        ss.state_labels.push_back("x" + std::to_string(i + 1));
    }
    return ss;
}

TransferFunction ss_to_tf(const StateSpace& ss) {
    if (!ss.is_siso()) {
        throw DimensionError("ss_to_tf needs a single-input single-output realization");
    }
    TransferFunction tf;
    tf.den = char_poly(ss.A);
    const Eigen::Index n = ss.states();

    // Leverrier recursion: adj(sI - A) = sum_k s^{n-1-k} M_k,
    // M_0 = I, M_k = A M_{k-1} + c_k I.
    std::vector<double> num(static_cast<std::size_t>(n) + 1, 0.0);
    Matrix m_k = Matrix::Identity(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        if (k > 0) {
            m_k = ss.A * m_k + tf.den[static_cast<std::size_t>(k)] * Matrix::Identity(n, n);
        }
        num[static_cast<std::size_t>(k) + 1] = (ss.C * m_k * ss.B)(0, 0);
    }
    const double d = ss.D(0, 0);
    for (std::size_t k = 0; k < num.size(); ++k) {
        num[k] += d * tf.den[k];
    }

    double scale = 0.0;
    for (double c : num) {
        scale = std::max(scale, std::abs(c));
    }
    std::size_t first = 0;
    while (first + 1 < num.size() && std::abs(num[first]) <= 1e-14 * scale) {
        ++first;
    }
    tf.num.assign(num.begin() + static_cast<std::ptrdiff_t>(first), num.end());
    return tf;
}

StateSpace companion_plant(const PlantParams& p) {
    TransferFunction tf;
    tf.num = {1.0};
    tf.den = char_poly(linearize(p).A);
    tf.den.front() = 1.0;
    return to_companion(tf);
}

StateSpace design_plant(const PlantParams& p, Realization which) {
    return which == Realization::physical ? linearize(p) : companion_plant(p);
}

} // namespace ems
