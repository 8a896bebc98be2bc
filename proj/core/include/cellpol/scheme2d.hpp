#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cellpol/core_types.hpp"
#include "cellpol/linalg.hpp"

namespace cellpol {

/**
 * Sign of the Neumann datum of the potential at the active boundary x = r.
 *
 * Attractive: grad(c).n = S*mu, so the advection field points towards the
 * membrane regions rich in markers. PaperC2: -d_x c = S*mu, the literal
 * discretised boundary condition, kept for comparison.
 */
enum class SignConvention { Attractive, PaperC2 };

std::string to_string(SignConvention convention);
SignConvention parse_sign_convention(const std::string& text);

struct Potential2D {
    std::vector<double> c;
    double alpha{0.0};
    SignConvention convention{SignConvention::Attractive};
    double relative_residual{0.0};
};

/**
 * Face velocities on the bounded x periodic grid.
 *
 * x-faces: (nx+1)*ny values, face f of row k at f*ny + k separates cells f-1 and f;
 * the two wall faces f = 0 and f = nx are always 0 because the total flux there
 * is prescribed. y-faces: nx*ny values, entry j*ny + k is u at (j, k+1/2) with
 * periodic wrap k = ny-1 -> 0.
 */
struct FaceVelocities2D {
    std::size_t nx{0};
    std::size_t ny{0};
    std::vector<double> ux;
    std::vector<double> uy;

    double x_face(std::size_t f, std::size_t k) const { return ux[f * ny + k]; }
    double y_face(std::size_t j, std::size_t k) const { return uy[j * ny + k]; }
    double max_abs() const;
    static FaceVelocities2D zero(const Grid2D& grid);
};

/// mu^{n+1}_k = mu^n_k + dt*(k_on*rho_wall_k - k_off*mu^n_k). Throws if dt*k_off > 1.
std::vector<double> step_mu_2d(std::span<const double> mu, std::span<const double> rho_wall,
                               double dt, const Params& params);

/// Right-hand side +/- dx*S_k*mu_k on the wall row, 0 elsewhere.
std::vector<double> potential_rhs(const Grid2D& grid, std::span<const double> mu,
                                  const Params& params, SignConvention convention);

/// One-shot solve of the screened problem (assembles and factorises).
Potential2D solve_potential(std::span<const double> mu, const Grid2D& grid, const Params& params,
                            SignConvention convention = SignConvention::Attractive);

/// chi times centred differences of c on interior x-faces and all (periodic) y-faces.
FaceVelocities2D face_velocities(const Grid2D& grid, std::span<const double> c, double chi);

/// Largest positivity-preserving rate: per cell, outflow speeds over spacing plus
/// k_on/dx on the wall row. dt*rate <= 1 keeps rho and mu nonnegative.
double positivity_rate_2d(const Grid2D& grid, const FaceVelocities2D& u, const Params& params);

/**
 * Explicit part B*P + R of the rho update, in the dx^2/dt scaling of the
 * implicit diffusion matrix (block form when dx == dy).
 */
std::vector<double> explicit_rhs_2d(const Grid2D& grid, std::span<const double> rho,
                                    const FaceVelocities2D& u, std::span<const double> mu_old,
                                    std::span<const double> mu_new, double dt);

struct StepInfo {
    double dt{0.0};
    double max_speed{0.0};
    double conservation_defect{0.0};  ///< relative change of the combined mass
    double potential_residual{0.0};
    std::size_t solver_iterations{0};
};

/**
 * The coupled stepper: mu by explicit Euler, c from the screened Neumann problem
 * with data mu^n, face velocities from c, then the semi-implicit rho update with
 * wall flux -(mu^{n+1} - mu^n)/dt.
 *
 * The screened factorisation is computed once; the diffusion matrix is
 * re-assembled only when dt changes.
 */
class CoupledStepper {
public:
    CoupledStepper(Grid2D grid, Params params,
                   SignConvention convention = SignConvention::Attractive,
                   double tol = kDefaultSolveTolerance);

    const Grid2D& grid() const { return grid_; }
    const Params& params() const { return params_; }
    SignConvention convention() const { return convention_; }

    /// Potential and face velocities for the given state (depend on mu^n only).
    struct Prepared {
        Potential2D potential;
        FaceVelocities2D velocities;
        double rate{0.0};  ///< positivity rate, see positivity_rate_2d
    };
    Prepared prepare(const SimState& state) const;

    /// Advances with a prepared potential. Throws CflViolation or PositivityStepViolation.
    SimState advance(const SimState& state, const Prepared& prepared, double dt,
                     StepInfo* info = nullptr);
    SimState step(const SimState& state, double dt, StepInfo* info = nullptr);

    /// rho update on its own; used directly by tests.
    std::vector<double> step_rho(std::span<const double> rho, const FaceVelocities2D& u,
                                 std::span<const double> mu_old, std::span<const double> mu_new,
                                 double dt, LinearSolveReport* report = nullptr);

    Potential2D solve_potential(std::span<const double> mu) const;

private:
    const SeparableSolver2D& diffusion_for(double dt);

    Grid2D grid_;
    Params params_;
    SignConvention convention_;
    double tol_;
    SeparableSolver2D screened_;
    SeparableSolver2D diffusion_;
};

std::vector<double> step_rho_2d(const Grid2D& grid, std::span<const double> rho,
                                const FaceVelocities2D& u, std::span<const double> mu_old,
                                std::span<const double> mu_new, double dt, double D = 1.0);

SimState step_coupled(const Grid2D& grid, const SimState& state, double dt, const Params& params,
                      SignConvention convention = SignConvention::Attractive,
                      StepInfo* info = nullptr);

}  // namespace cellpol
