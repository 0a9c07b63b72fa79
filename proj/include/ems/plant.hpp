#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ems/numerics.hpp"

namespace ems {

/// Physical constants of the quarter-vehicle electromagnetic suspension and
/// its operating point. Defaults are the reference vehicle.
struct PlantParams {
    double m = 1.0;        // kg
    double R_coil = 10.0;  // ohm
    double L_coil = 0.2;   // H
    double i0 = 0.8;       // A
    double x0 = 0.03;      // m
    double k_em = 2.9e-6;  // N m^2 / A^2
    double E_pot = 5.0;    // V
    double D_pot = 0.13;   // m
    double g = 9.81;       // m/s^2

    // Optional coil geometry; when all three are set, k_em must equal
    // mu0 * N^2 * A / 2.
    std::optional<double> mu0;
    std::optional<double> N_turns;
    std::optional<double> A_pole;

    /// Throws DomainError naming the first violated constraint.
    void validate() const;

    bool operator==(const PlantParams&) const = default;
};

enum class Realization { physical, companion };

std::string to_string(Realization r);

struct StateSpace {
    Matrix A;
    Matrix B;
    Matrix C;
    Matrix D;
    Realization realization = Realization::physical;
    std::vector<std::string> state_labels;

    Eigen::Index states() const { return A.rows(); }
    Eigen::Index inputs() const { return B.cols(); }
    Eigen::Index outputs() const { return C.rows(); }
    bool is_siso() const { return inputs() == 1 && outputs() == 1; }

    /// Checks shapes, finiteness and label count.
    void validate() const;
};

/// Ratio of polynomials, coefficients in descending degree. The denominator
/// is monic.
struct TransferFunction {
    std::vector<double> num;
    std::vector<double> den;

    std::size_t order() const { return den.empty() ? 0 : den.size() - 1; }
    bool is_strictly_proper() const { return num.size() < den.size(); }
    Complex evaluate(Complex s) const;
};

using PlantState = std::array<double, 3>;

/// Attractive force (k/2)(i/x)^2 of the electromagnet.
double electromagnet_force(double gap, double current, double k_em);

/// Nonlinear dynamics in (gap, velocity, current) coordinates.
PlantState nonlinear_derivative(const PlantState& z, double voltage, const PlantParams& p);

/// |m g - f_m(x0, i0)|: how far the operating point is from force balance.
double equilibrium_residual(const PlantParams& p);

/// Linearization about (x0, 0, i0) in physical coordinates, with the
/// potentiometer gain E/(L D) folded into the input column.
StateSpace linearize(const PlantParams& p);

/// Central-difference Jacobian of an arbitrary vector field.
Matrix finite_difference_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& z,
                                  double h);

/// Central-difference Jacobian of nonlinear_derivative with respect to z.
Matrix finite_difference_jacobian(const PlantState& z, double voltage, const PlantParams& p,
                                  double h);

/// Monic coefficients of det(sI - A), descending degree.
std::vector<double> char_poly(const Matrix& a);

/// Controllable companion realization of a strictly proper TF.
StateSpace to_companion(const TransferFunction& tf);

/// C (sI - A)^{-1} B + D of a SISO realization. No pole-zero cancellation.
TransferFunction ss_to_tf(const StateSpace& ss);

/// Companion realization with unity numerator over char_poly(linearize(p).A),
/// the model the controllers are designed against.
StateSpace companion_plant(const PlantParams& p);

/// Realization selected for synthesis and simulation.
StateSpace design_plant(const PlantParams& p, Realization which);

} // namespace ems
