#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace ems {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

/// Eigenvalues of a real square matrix, sorted by (real, imag) ascending.
using Spectrum = std::vector<Complex>;

/// Throws DomainError if any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);
void require_square(const Matrix& m, const char* what);

bool is_symmetric(const Matrix& m, double tol);
/// Smallest eigenvalue of the symmetric part of `m`.
double min_symmetric_eigenvalue(const Matrix& m);

Spectrum eig(const Matrix& a);

/// True when every eigenvalue has real part < -margin.
bool is_hurwitz(const Matrix& a, double margin = 0.0);
double spectral_abscissa(const Matrix& a);

/// Largest absolute distance after pairing two spectra as multisets.
/// Returns +inf when the sizes differ.
double spectrum_distance(const Spectrum& a, const Spectrum& b);

/// Solves A^T X + X A + Q = 0 (Bartels–Stewart on the complex Schur form).
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

/// Stabilizing solution of the continuous algebraic Riccati equation
///
///   A^T P + P A - (P B + N) R^{-1} (B^T P + N^T) + Q = 0.
///
/// The cross term is absorbed into (A - B R^{-1} N^T, Q - N R^{-1} N^T). The
/// Hamiltonian matrix-sign iteration gives a first solution, which a few
/// Newton–Kleinman steps then polish.
Matrix solve_care(const Matrix& a, const Matrix& b, const Matrix& q,
                  const Matrix& r, const Matrix& n);

/// ‖A^T P + P A - (P B + N) R^{-1} (B^T P + N^T) + Q‖_F
double care_residual(const Matrix& a, const Matrix& b, const Matrix& q,
                     const Matrix& r, const Matrix& n, const Matrix& p);

/// PBH test over the eigenvalues with Re(λ) >= -tol.
bool is_stabilizable(const Matrix& a, const Matrix& b, double tol = 1e-9);
bool is_detectable(const Matrix& a, const Matrix& c, double tol = 1e-9);

} // namespace ems
