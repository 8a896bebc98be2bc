#include "cellpol/scheme2d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cellpol/errors.hpp"
#include "cellpol/scheme1d.hpp"

namespace cellpol {

std::string to_string(SignConvention convention) {
    return convention == SignConvention::Attractive ? "attractive" : "paper-c2";
}

SignConvention parse_sign_convention(const std::string& text) {
    if (text == "attractive") return SignConvention::Attractive;
    if (text == "paper-c2" || text == "paper_c2") return SignConvention::PaperC2;
    throw std::invalid_argument("unknown sign convention '" + text + "' (attractive | paper-c2)");
}

double FaceVelocities2D::max_abs() const {
    double m = 0.0;
    for (double v : ux) m = std::max(m, std::abs(v));
    for (double v : uy) m = std::max(m, std::abs(v));
    return m;
}

FaceVelocities2D FaceVelocities2D::zero(const Grid2D& grid) {
    FaceVelocities2D u;
    u.nx = grid.nx();
    u.ny = grid.ny();
    u.ux.assign((grid.nx() + 1) * grid.ny(), 0.0);
    u.uy.assign(grid.cells(), 0.0);
    return u;
}

std::vector<double> step_mu_2d(std::span<const double> mu, std::span<const double> rho_wall,
                               double dt, const Params& params) {
    if (mu.size() != rho_wall.size()) throw std::invalid_argument("step_mu_2d: size mismatch");
    if (!(dt > 0.0)) throw std::invalid_argument("step_mu_2d: dt must be > 0");
    if (dt * params.k_off > 1.0) throw PositivityStepViolation(dt * params.k_off);
    std::vector<double> next(mu.size());
    for (std::size_t k = 0; k < mu.size(); ++k) {
        next[k] = mu[k] + dt * (params.k_on * rho_wall[k] - params.k_off * mu[k]);
    }
    return next;
}

std::vector<double> potential_rhs(const Grid2D& grid, std::span<const double> mu,
                                  const Params& params, SignConvention convention) {
    if (mu.size() != grid.ny()) throw std::invalid_argument("potential_rhs: mu size != N_y");
    const double sign = convention == SignConvention::Attractive ? 1.0 : -1.0;
    std::vector<double> rhs(grid.cells(), 0.0);
    const std::size_t wall = grid.nx() - 1;
    for (std::size_t k = 0; k < grid.ny(); ++k) {
        rhs[grid.index(wall, k)] = sign * grid.dx() * params.S_at(k) * mu[k];
    }
    return rhs;
}

Potential2D solve_potential(std::span<const double> mu, const Grid2D& grid, const Params& params,
                            SignConvention convention) {
    params.validate(grid.ny());
    const auto solver = SeparableSolver2D::screened(grid, params.alpha);
    auto result = solver.solve(potential_rhs(grid, mu, params, convention));
    return {std::move(result.x), params.alpha, convention, result.report.relative_residual};
}

FaceVelocities2D face_velocities(const Grid2D& grid, std::span<const double> c, double chi) {
    if (c.size() != grid.cells()) throw std::invalid_argument("face_velocities: size mismatch");
    FaceVelocities2D u = FaceVelocities2D::zero(grid);
    const std::size_t nx = grid.nx();
    const std::size_t ny = grid.ny();
    const double sx = chi / grid.dx();
    const double sy = chi / grid.dy();
    for (std::size_t f = 1; f < nx; ++f) {
        for (std::size_t k = 0; k < ny; ++k) {
            u.ux[f * ny + k] = sx * (c[grid.index(f, k)] - c[grid.index(f - 1, k)]);
        }
    }
    for (std::size_t j = 0; j < nx; ++j) {
        for (std::size_t k = 0; k < ny; ++k) {
            u.uy[j * ny + k] = sy * (c[grid.index(j, (k + 1) % ny)] - c[grid.index(j, k)]);
        }
    }
    return u;
}

double positivity_rate_2d(const Grid2D& grid, const FaceVelocities2D& u, const Params& params) {
    const std::size_t nx = grid.nx();
    const std::size_t ny = grid.ny();
    double rate = params.k_off;
    for (std::size_t j = 0; j < nx; ++j) {
        for (std::size_t k = 0; k < ny; ++k) {
            const std::size_t km = (k + ny - 1) % ny;
            double r = (std::max(u.x_face(j + 1, k), 0.0) - std::min(u.x_face(j, k), 0.0)) / grid.dx() +
                       (std::max(u.y_face(j, k), 0.0) - std::min(u.y_face(j, km), 0.0)) / grid.dy();
            if (j + 1 == nx) r += params.k_on / grid.dx();
            rate = std::max(rate, r);
        }
    }
    return rate;
}

namespace {

void require_cfl_2d(const Grid2D& grid, const FaceVelocities2D& u, double dt) {
    double courant = 0.0;
    for (double v : u.ux) courant = std::max(courant, std::abs(v) * dt / grid.dx());
    for (double v : u.uy) courant = std::max(courant, std::abs(v) * dt / grid.dy());
    if (!(courant < 1.0)) throw CflViolation(u.max_abs(), std::min(grid.dx(), grid.dy()) / dt);
}

double combined_mass(const Grid2D& grid, std::span<const double> rho, std::span<const double> mu) {
    double bulk = 0.0;
    for (double v : rho) bulk += v;
    double wall = 0.0;
    for (double v : mu) wall += v;
    return bulk * grid.cell_area() + wall * grid.dy();
}

}  // namespace

std::vector<double> explicit_rhs_2d(const Grid2D& grid, std::span<const double> rho,
                                    const FaceVelocities2D& u, std::span<const double> mu_old,
                                    std::span<const double> mu_new, double dt) {
    const std::size_t nx = grid.nx();
    const std::size_t ny = grid.ny();
    if (rho.size() != grid.cells() || mu_old.size() != ny || mu_new.size() != ny) {
        throw std::invalid_argument("explicit_rhs_2d: size mismatch");
    }
    const double dx = grid.dx();
    const double scale = dx * dx / dt;
    const double y_scale = dx * dx / grid.dy();

    std::vector<double> b(grid.cells());
    for (std::size_t j = 0; j < nx; ++j) {
        for (std::size_t k = 0; k < ny; ++k) {
            const std::size_t i = grid.index(j, k);
            const std::size_t kp = (k + 1) % ny;
            const std::size_t km = (k + ny - 1) % ny;
            const double fx_plus = j + 1 < nx ? upwind_flux(u.x_face(j + 1, k), rho[i], rho[grid.index(j + 1, k)]) : 0.0;
            const double fx_minus = j > 0 ? upwind_flux(u.x_face(j, k), rho[grid.index(j - 1, k)], rho[i]) : 0.0;
            const double fy_plus = upwind_flux(u.y_face(j, k), rho[i], rho[grid.index(j, kp)]);
            const double fy_minus = upwind_flux(u.y_face(j, km), rho[grid.index(j, km)], rho[i]);
            b[i] = scale * rho[i] - dx * (fx_plus - fx_minus) - y_scale * (fy_plus - fy_minus);
        }
    }
    const std::size_t wall = nx - 1;
    for (std::size_t k = 0; k < ny; ++k) {
        b[grid.index(wall, k)] -= dx * (mu_new[k] - mu_old[k]) / dt;
    }
    return b;
}

CoupledStepper::CoupledStepper(Grid2D grid, Params params, SignConvention convention, double tol)
    : grid_(std::move(grid)),
      params_(std::move(params)),
      convention_(convention),
      tol_(tol),
      screened_((params_.validate(grid_.ny()), SeparableSolver2D::screened(grid_, params_.alpha))),
      diffusion_(SeparableSolver2D::diffusion(grid_, 1.0, params_.D)) {}

const SeparableSolver2D& CoupledStepper::diffusion_for(double dt) {
    diffusion_.set_shift(grid_.dx() * grid_.dx() / dt);
    return diffusion_;
}

Potential2D CoupledStepper::solve_potential(std::span<const double> mu) const {
    auto result = screened_.solve(potential_rhs(grid_, mu, params_, convention_), 1e-10);
    return {std::move(result.x), params_.alpha, convention_, result.report.relative_residual};
}

CoupledStepper::Prepared CoupledStepper::prepare(const SimState& state) const {
    Prepared p;
    p.potential = solve_potential(state.mu);
    p.velocities = face_velocities(grid_, p.potential.c, params_.chi);
    p.rate = positivity_rate_2d(grid_, p.velocities, params_);
    return p;
}

std::vector<double> CoupledStepper::step_rho(std::span<const double> rho, const FaceVelocities2D& u,
                                             std::span<const double> mu_old,
                                             std::span<const double> mu_new, double dt,
                                             LinearSolveReport* report) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_rho_2d: dt must be > 0");
    require_cfl_2d(grid_, u, dt);
    const auto b = explicit_rhs_2d(grid_, rho, u, mu_old, mu_new, dt);
    auto result = diffusion_for(dt).solve(b, tol_);
    if (report) *report = result.report;
    for (double v : result.x) {
        if (!std::isfinite(v)) throw NonFiniteState("step_rho_2d");
    }
    return std::move(result.x);
}

SimState CoupledStepper::advance(const SimState& state, const Prepared& prepared, double dt,
                                 StepInfo* info) {
    const std::size_t ny = grid_.ny();
    if (state.rho.size() != grid_.cells() || state.mu.size() != ny) {
        throw std::invalid_argument("CoupledStepper: state does not match grid");
    }
    std::vector<double> rho_wall(state.rho.end() - static_cast<std::ptrdiff_t>(ny), state.rho.end());

    SimState next;
    next.mu = step_mu_2d(state.mu, rho_wall, dt, params_);
    LinearSolveReport report;
    next.rho = step_rho(state.rho, prepared.velocities, state.mu, next.mu, dt, &report);
    next.c = prepared.potential.c;
    next.t = state.t + dt;
    next.step = state.step + 1;

    if (info) {
        const double m0 = combined_mass(grid_, state.rho, state.mu);
        const double m1 = combined_mass(grid_, next.rho, next.mu);
        info->dt = dt;
        info->max_speed = prepared.velocities.max_abs();
        info->conservation_defect = m0 > 0.0 ? std::abs(m1 - m0) / m0 : std::abs(m1);
        info->potential_residual = prepared.potential.relative_residual;
        info->solver_iterations = report.iterations;
    }
    return next;
}

SimState CoupledStepper::step(const SimState& state, double dt, StepInfo* info) {
    return advance(state, prepare(state), dt, info);
}

std::vector<double> step_rho_2d(const Grid2D& grid, std::span<const double> rho,
                                const FaceVelocities2D& u, std::span<const double> mu_old,
                                std::span<const double> mu_new, double dt, double D) {
    Params params;
    params.D = D;
    CoupledStepper stepper(grid, params);
    return stepper.step_rho(rho, u, mu_old, mu_new, dt);
}

SimState step_coupled(const Grid2D& grid, const SimState& state, double dt, const Params& params,
                      SignConvention convention, StepInfo* info) {
    CoupledStepper stepper(grid, params, convention);
    return stepper.step(state, dt, info);
}

}  // namespace cellpol
