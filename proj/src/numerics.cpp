#include "ems/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "ems/errors.hpp"

namespace ems {

namespace {

using ComplexMatrix = Eigen::MatrixXcd;

constexpr int kMaxSignIterations = 100;
constexpr int kMaxNewtonSteps = 12;

std::string shape_of(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Smallest singular value of [A - λI, B] (or its dual); zero means the mode
// at λ is uncontrollable.
double pbh_margin(const Matrix& a, const Matrix& b, Complex lambda) {
    const Eigen::Index n = a.rows();
    ComplexMatrix m(n, n + b.cols());
    m.leftCols(n) = a.cast<Complex>() - lambda * ComplexMatrix::Identity(n, n);
    m.rightCols(b.cols()) = b.cast<Complex>();
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    return svd.singularValues().minCoeff();
}

// Matrix sign function by scaled Newton iteration.
Matrix matrix_sign(const Matrix& h) {
    const Eigen::Index dim = h.rows();
    Matrix z = h;
    bool scaling = true;
    for (int iter = 0; iter < kMaxSignIterations; ++iter) {
        Eigen::PartialPivLU<Matrix> lu(z);
        const Matrix& lu_factors = lu.matrixLU();
        double log_det = 0.0;
        for (Eigen::Index i = 0; i < dim; ++i) {
            const double d = std::abs(lu_factors(i, i));
            if (d == 0.0 || !std::isfinite(d)) {
                throw NumericalFailure(
                    "sign iteration hit a singular iterate; the Hamiltonian "
                    "has eigenvalues on the imaginary axis");
            }
            log_det += std::log(d);
        }
        const Matrix z_inv = lu.inverse();
        const double c = scaling ? std::exp(-log_det / static_cast<double>(dim)) : 1.0;
        const Matrix next = 0.5 * (c * z + z_inv / c);
        if (!next.allFinite()) {
            throw NumericalFailure("sign iteration produced non-finite entries");
        }
        const double change = (next - z).lpNorm<1>();
        const double size = next.lpNorm<1>();
        z = next;
        if (change <= 1e-12 * size) {
            return z;
        }
        // Determinant scaling only helps far from convergence; once the
        // iterate is close to an involution it slows the quadratic phase.
        if (change <= 1e-2 * size) {
            scaling = false;
        }
    }
    throw NumericalFailure("matrix sign iteration did not converge in " +
                           std::to_string(kMaxSignIterations) + " steps");
}

} // namespace

void require_finite(const Matrix& m, const char* what) {
    if (m.size() == 0) {
        throw DimensionError(std::string(what) + " is empty");
    }
    if (!m.allFinite()) {
        throw DomainError(std::string(what) + " has non-finite entries");
    }
}

void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols()) {
        throw DimensionError(std::string(what) + " must be square, got " + shape_of(m));
    }
}

bool is_symmetric(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) {
        return false;
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

double min_symmetric_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Spectrum eig(const Matrix& a) {
    require_square(a, "eig input");
    require_finite(a, "eig input");
    Eigen::EigenSolver<Matrix> es(a, false);
    if (es.info() != Eigen::Success) {
        throw NumericalFailure("eigenvalue iteration did not converge");
    }
    Spectrum out(es.eigenvalues().begin(), es.eigenvalues().end());
    std::sort(out.begin(), out.end(), [](Complex x, Complex y) {
        if (x.real() != y.real()) {
            return x.real() < y.real();
        }
        return x.imag() < y.imag();
    });
    return out;
}

double spectral_abscissa(const Matrix& a) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const Complex& l : eig(a)) {
        worst = std::max(worst, l.real());
    }
    return worst;
}

bool is_hurwitz(const Matrix& a, double margin) { return spectral_abscissa(a) < -margin; }

double spectrum_distance(const Spectrum& a, const Spectrum& b) {
    if (a.size() != b.size()) {
        return std::numeric_limits<double>::infinity();
    }
    std::vector<bool> used(b.size(), false);
    double worst = 0.0;
    for (const Complex& x : a) {
        std::size_t best = b.size();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (!used[j] && std::abs(x - b[j]) < best_d) {
                best_d = std::abs(x - b[j]);
                best = j;
            }
        }
        used[best] = true;
        worst = std::max(worst, best_d);
    }
    return worst;
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
    require_square(a, "Lyapunov A");
    require_square(q, "Lyapunov Q");
    require_finite(a, "Lyapunov A");
    require_finite(q, "Lyapunov Q");
    if (a.rows() != q.rows()) {
        throw DimensionError("Lyapunov A is " + shape_of(a) + " but Q is " + shape_of(q));
    }
    if (!is_symmetric(q, 1e-10)) {
        throw DomainError("Lyapunov Q must be symmetric");
    }

    const Eigen::Index n = a.rows();
    Eigen::ComplexSchur<ComplexMatrix> schur(a.cast<Complex>());
    if (schur.info() != Eigen::Success) {
        throw NumericalFailure("Schur decomposition did not converge");
    }
    const ComplexMatrix& u = schur.matrixU();
    const ComplexMatrix& t = schur.matrixT();

    // A = U T U^H turns A^T X + X A = -Q into T^H Y + Y T = -U^H Q U with
    // Y = U^H X U. T^H is lower triangular, so Y fills column by column.
    const ComplexMatrix rhs = -(u.adjoint() * q.cast<Complex>() * u);
    const double singular_tol =
        1e-12 * std::max(1.0, a.lpNorm<Eigen::Infinity>());
    ComplexMatrix y = ComplexMatrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            Complex s = rhs(i, j);
            for (Eigen::Index k = 0; k < i; ++k) {
                s -= std::conj(t(k, i)) * y(k, j);
            }
            for (Eigen::Index k = 0; k < j; ++k) {
                s -= y(i, k) * t(k, j);
            }
            const Complex d = std::conj(t(i, i)) + t(j, j);
            if (std::abs(d) <= singular_tol) {
                throw SingularEquation(
                    "Lyapunov operator is singular: eigenvalues sum to zero");
            }
            y(i, j) = s / d;
        }
    }
    const Matrix x = (u * y * u.adjoint()).real();
    return symmetrize(x);
}

double care_residual(const Matrix& a, const Matrix& b, const Matrix& q,
                     const Matrix& r, const Matrix& n, const Matrix& p) {
    const Matrix pbn = p * b + n;
    const Matrix res = a.transpose() * p + p * a - pbn * r.llt().solve(pbn.transpose()) + q;
    return res.norm();
}

bool is_stabilizable(const Matrix& a, const Matrix& b, double tol) {
    const double scale =
        std::max(1.0, std::max(a.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>()));
    for (const Complex& l : eig(a)) {
        if (l.real() >= -tol && pbh_margin(a, b, l) <= tol * scale) {
            return false;
        }
    }
    return true;
}

bool is_detectable(const Matrix& a, const Matrix& c, double tol) {
    return is_stabilizable(a.transpose(), c.transpose(), tol);
}

Matrix solve_care(const Matrix& a, const Matrix& b, const Matrix& q,
                  const Matrix& r, const Matrix& n) {
    require_square(a, "CARE A");
    require_finite(a, "CARE A");
    require_finite(b, "CARE B");
    require_finite(q, "CARE Q");
    require_finite(r, "CARE R");
    require_finite(n, "CARE N");
    const Eigen::Index dim = a.rows();
    const Eigen::Index inputs = b.cols();
    if (b.rows() != dim || q.rows() != dim || q.cols() != dim || r.rows() != inputs ||
        r.cols() != inputs || n.rows() != dim || n.cols() != inputs) {
        throw DimensionError("CARE operands have inconsistent shapes: A " + shape_of(a) +
                             ", B " + shape_of(b) + ", Q " + shape_of(q) + ", R " +
                             shape_of(r) + ", N " + shape_of(n));
    }
    if (!is_symmetric(q, 1e-10)) {
        throw WeightError("CARE Q must be symmetric");
    }
    if (!is_symmetric(r, 1e-10) || min_symmetric_eigenvalue(r) <= 0.0) {
        throw WeightError("CARE R must be symmetric positive definite");
    }

    const Eigen::LLT<Matrix> r_chol(symmetrize(r));
    const Matrix r_inv = r_chol.solve(Matrix::Identity(inputs, inputs));
    const Matrix a_bar = a - b * r_inv * n.transpose();
    const Matrix q_bar = symmetrize(q - n * r_inv * n.transpose());
    const double q_scale = std::max(1.0, q.norm());
    if (min_symmetric_eigenvalue(q_bar) < -1e-10 * q_scale) {
        throw WeightError("composite weight [[Q, N], [N^T, R]] is not positive semidefinite");
    }
    if (!is_stabilizable(a_bar, b)) {
        throw SynthesisError("pair (A, B) is not stabilizable");
    }

    const Matrix g = symmetrize(b * r_inv * b.transpose());
    Matrix h(2 * dim, 2 * dim);
    h << a_bar, -g, -q_bar, -a_bar.transpose();

    for (const Complex& l : eig(h)) {
        if (std::abs(l.real()) <= 1e-10 * std::max(1.0, h.lpNorm<Eigen::Infinity>())) {
            throw SynthesisError(
                "Hamiltonian has eigenvalues on the imaginary axis; an undetectable "
                "mode lies on the axis");
        }
    }

    const Matrix w = matrix_sign(h);
    Matrix lhs(2 * dim, dim);
    lhs << w.topRightCorner(dim, dim),
        w.bottomRightCorner(dim, dim) + Matrix::Identity(dim, dim);
    Matrix rhs(2 * dim, dim);
    rhs << w.topLeftCorner(dim, dim) + Matrix::Identity(dim, dim),
        w.bottomLeftCorner(dim, dim);
    Matrix p = symmetrize(lhs.colPivHouseholderQr().solve(-rhs));

    const Matrix zero_n = Matrix::Zero(dim, inputs);
    double residual = care_residual(a_bar, b, q_bar, r, zero_n, p);
    for (int step = 0; step < kMaxNewtonSteps; ++step) {
        const Matrix k = r_inv * b.transpose() * p;
        const Matrix closed = a_bar - b * k;
        if (!is_hurwitz(closed)) {
            break;
        }
        Matrix candidate;
        try {
            candidate = solve_lyapunov(closed, symmetrize(q_bar + k.transpose() * r * k));
        } catch (const SingularEquation&) {
            break;
        }
        const double cand_res = care_residual(a_bar, b, q_bar, r, zero_n, candidate);
        if (!(cand_res < residual)) {
            break;
        }
        p = candidate;
        residual = cand_res;
        if (residual <= 1e-15 * q_scale) {
            break;
        }
    }

    if (!p.allFinite()) {
        throw NumericalFailure("CARE solution has non-finite entries");
    }
    const double full_residual = care_residual(a, b, q, r, n, p);
    if (full_residual > 1e-8 * q_scale) {
        throw NumericalFailure("CARE residual " + std::to_string(full_residual) +
                               " exceeds tolerance");
    }
    const Matrix gain = r_inv * (b.transpose() * p + n.transpose());
    if (!is_hurwitz(a - b * gain)) {
        throw NumericalFailure("CARE solution is not stabilizing");
    }
    return p;
}

} // namespace ems
