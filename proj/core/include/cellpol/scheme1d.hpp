#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cellpol/core_types.hpp"
#include "cellpol/linalg.hpp"

namespace cellpol {

/// Safety factor applied to every stability bound when suggesting a time step.
inline constexpr double kCflSafety = 0.9;

/**
 * Face velocities u_{j+1/2} of a 1D grid, stored for faces f = 0..nx where face f
 * separates cells f-1 and f. On a periodic grid face 0 and face nx are the same
 * face and must carry the same value. On the half-line the two boundary faces
 * carry no advective flux and are stored as 0.
 */
class FaceVelocities1D {
public:
    static FaceVelocities1D periodic(std::vector<double> faces);
    static FaceVelocities1D constant_periodic(std::size_t nx, double u);
    /// Interior faces take u, the two wall faces 0.
    static FaceVelocities1D constant_bounded(std::size_t nx, double u);

    std::size_t cells() const { return u_.size() - 1; }
    double operator[](std::size_t face) const { return u_[face]; }
    std::span<const double> values() const { return u_; }
    double max_abs() const;

private:
    explicit FaceVelocities1D(std::vector<double> u) : u_(std::move(u)) {}
    std::vector<double> u_;
};

/// Upwind advective flux: u*x_minus for u > 0, u*x_plus for u < 0, 0 for u = 0.
constexpr double upwind_flux(double u, double x_minus, double x_plus) {
    if (u > 0.0) return u * x_minus;
    if (u < 0.0) return u * x_plus;
    return 0.0;
}

struct CflCheck {
    bool ok;
    double suggested_dt;  ///< kCflSafety*dx/max|u|, +inf when the field is at rest
};

CflCheck check_cfl(const FaceVelocities1D& u, double dx, double dt);

/// Explicit advection matrix B in the scaling where (dt/dx^2) B has unit column sums.
SparseMatrix assemble_advection_periodic(const FaceVelocities1D& u, double dx, double dt);

/**
 * Right-hand side (dx^2/dt) rho - dx * (A_{j+1/2} - A_{j-1/2}) of the flux-form
 * update, plus dx * prescribed boundary fluxes on a bounded grid. Matches B*rho.
 */
std::vector<double> explicit_rhs_1d(const Grid1D& grid, std::span<const double> rho,
                                    const FaceVelocities1D& u, double dt,
                                    double left_flux = 0.0, double right_flux = 0.0);

/// Implicit diffusion, explicit upwind advection on the periodic grid. Reuses A while dt is fixed.
class PeriodicStepper {
public:
    PeriodicStepper(Grid1D grid, double D = 1.0, double tol = kDefaultSolveTolerance);

    const Grid1D& grid() const { return grid_; }
    /// Throws CflViolation if max|u| >= dx/dt.
    std::vector<double> step(std::span<const double> rho, const FaceVelocities1D& u, double dt);
    const LinearSolveReport& last_report() const { return report_; }

private:
    const TridiagonalSolver& solver_for(double dt);

    Grid1D grid_;
    double D_;
    double tol_;
    std::optional<TridiagonalSolver> solver_;
    double dt_{0.0};
    LinearSolveReport report_;
};

std::vector<double> step_periodic(const Grid1D& grid, std::span<const double> rho,
                                  const FaceVelocities1D& u, double dt, double D = 1.0);

/**
 * Steppers for the truncated half-line [0, L] with the membrane at x = 0.
 *
 * simplified: velocity -chi*rho_0 (first cell value), zero total flux at both ends.
 * exchange:   mu is advanced first by explicit Euler, then rho with velocity
 *             -chi*mu^n and wall flux (mu^{n+1} - mu^n)/dt leaving the first cell.
 */
class HalfLineStepper {
public:
    HalfLineStepper(Grid1D grid, Params params, double tol = kDefaultSolveTolerance);

    const Grid1D& grid() const { return grid_; }
    const Params& params() const { return params_; }

    std::vector<double> step_simplified(std::span<const double> rho, double dt);
    SimState step_exchange(const SimState& state, double dt);

    /// Largest positivity-preserving rate; dt*rate <= 1 keeps every output nonnegative.
    double simplified_rate(std::span<const double> rho) const;
    double exchange_rate(const SimState& state) const;

private:
    const TridiagonalSolver& solver_for(double dt);

    Grid1D grid_;
    Params params_;
    double tol_;
    std::optional<TridiagonalSolver> solver_;
    double dt_{0.0};
};

std::vector<double> step_simplified_halfline(const Grid1D& grid, std::span<const double> rho,
                                             double dt, const Params& params = {});
SimState step_exchange_halfline(const Grid1D& grid, const SimState& state, double dt,
                                const Params& params);

/// Rate bound for the periodic scheme: max_j ((u_{j+1/2})^+ - (u_{j-1/2})^-)/dx.
double periodic_rate(const FaceVelocities1D& u, double dx);

}  // namespace cellpol
