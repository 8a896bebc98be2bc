#include "cellpol/scheme1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cellpol/errors.hpp"

namespace cellpol {

FaceVelocities1D FaceVelocities1D::periodic(std::vector<double> faces) {
    if (faces.size() < 4) throw std::invalid_argument("FaceVelocities1D: need nx+1 >= 4 faces");
    if (faces.front() != faces.back()) {
        throw std::invalid_argument("FaceVelocities1D: periodic wrap requires u_{1/2} == u_{N+1/2}");
    }
    for (double v : faces) {
        if (!std::isfinite(v)) throw std::invalid_argument("FaceVelocities1D: non-finite velocity");
    }
    return FaceVelocities1D(std::move(faces));
}

FaceVelocities1D FaceVelocities1D::constant_periodic(std::size_t nx, double u) {
    return periodic(std::vector<double>(nx + 1, u));
}

FaceVelocities1D FaceVelocities1D::constant_bounded(std::size_t nx, double u) {
    if (!std::isfinite(u)) throw std::invalid_argument("FaceVelocities1D: non-finite velocity");
    std::vector<double> faces(nx + 1, u);
    faces.front() = 0.0;
    faces.back() = 0.0;
    return FaceVelocities1D(std::move(faces));
}

double FaceVelocities1D::max_abs() const {
    double m = 0.0;
    for (double v : u_) m = std::max(m, std::abs(v));
    return m;
}

CflCheck check_cfl(const FaceVelocities1D& u, double dx, double dt) {
    const double umax = u.max_abs();
    if (umax == 0.0) return {true, std::numeric_limits<double>::infinity()};
    return {umax * dt < dx, kCflSafety * dx / umax};
}

namespace {

void require_cfl(double umax, double dx, double dt) {
    if (!(umax * dt < dx)) throw CflViolation(umax, dx / dt);
}

void require_finite(std::span<const double> v, const char* where) {
    for (double x : v) {
        if (!std::isfinite(x)) throw NonFiniteState(where);
    }
}

}  // namespace

SparseMatrix assemble_advection_periodic(const FaceVelocities1D& u, double dx, double dt) {
    const std::size_t n = u.cells();
    std::vector<SparseMatrix::Triplet> t;
    t.reserve(3 * n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t left = (j + n - 1) % n;
        const std::size_t right = (j + 1) % n;
        const double up = u[j + 1];  // u_{j+1/2}
        const double um = u[j];      // u_{j-1/2}
        t.push_back({j, j, dx * dx / dt - dx * std::max(up, 0.0) + dx * std::min(um, 0.0)});
        t.push_back({j, right, -dx * std::min(up, 0.0)});
        t.push_back({j, left, dx * std::max(um, 0.0)});
    }
    return SparseMatrix(n, std::move(t));
}

std::vector<double> explicit_rhs_1d(const Grid1D& grid, std::span<const double> rho,
                                    const FaceVelocities1D& u, double dt, double left_flux,
                                    double right_flux) {
    const std::size_t n = grid.nx();
    if (rho.size() != n || u.cells() != n) throw std::invalid_argument("explicit_rhs_1d: size mismatch");
    const double dx = grid.dx();
    const bool periodic = grid.kind() == Grid1DKind::Periodic;

    // Advective flux through each face; wall faces carry none on the half-line.
    std::vector<double> flux(n + 1, 0.0);
    for (std::size_t f = 1; f < n; ++f) flux[f] = upwind_flux(u[f], rho[f - 1], rho[f]);
    if (periodic) {
        flux[0] = upwind_flux(u[0], rho[n - 1], rho[0]);
        flux[n] = flux[0];
    }

    std::vector<double> b(n);
    const double scale = dx * dx / dt;
    for (std::size_t j = 0; j < n; ++j) b[j] = scale * rho[j] - dx * (flux[j + 1] - flux[j]);
    if (!periodic) {
        b[0] -= dx * left_flux;
        b[n - 1] += dx * right_flux;
    }
    return b;
}

double periodic_rate(const FaceVelocities1D& u, double dx) {
    double rate = 0.0;
    for (std::size_t j = 0; j < u.cells(); ++j) {
        rate = std::max(rate, (std::max(u[j + 1], 0.0) - std::min(u[j], 0.0)) / dx);
    }
    return rate;
}

PeriodicStepper::PeriodicStepper(Grid1D grid, double D, double tol)
    : grid_(std::move(grid)), D_(D), tol_(tol) {
    if (grid_.kind() != Grid1DKind::Periodic) throw std::invalid_argument("PeriodicStepper needs a periodic grid");
    if (!(D > 0.0)) throw std::invalid_argument("PeriodicStepper: D must be > 0");
}

const TridiagonalSolver& PeriodicStepper::solver_for(double dt) {
    if (!solver_) {
        solver_.emplace(assemble_heat_periodic(grid_.nx(), grid_.dx(), dt, D_));
    } else if (dt != dt_) {
        solver_->set_shift(grid_.dx() * grid_.dx() / dt);
    }
    dt_ = dt;
    return *solver_;
}

std::vector<double> PeriodicStepper::step(std::span<const double> rho, const FaceVelocities1D& u,
                                          double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_periodic: dt must be > 0");
    require_cfl(u.max_abs(), grid_.dx(), dt);
    const auto b = explicit_rhs_1d(grid_, rho, u, dt);
    auto result = solver_for(dt).solve(b, tol_);
    report_ = result.report;
    require_finite(result.x, "step_periodic");
    return std::move(result.x);
}

std::vector<double> step_periodic(const Grid1D& grid, std::span<const double> rho,
                                  const FaceVelocities1D& u, double dt, double D) {
    PeriodicStepper stepper(grid, D);
    return stepper.step(rho, u, dt);
}

HalfLineStepper::HalfLineStepper(Grid1D grid, Params params, double tol)
    : grid_(std::move(grid)), params_(std::move(params)), tol_(tol) {
    if (grid_.kind() != Grid1DKind::HalfLine) throw std::invalid_argument("HalfLineStepper needs a half-line grid");
    params_.validate();
}

const TridiagonalSolver& HalfLineStepper::solver_for(double dt) {
    if (!solver_) {
        solver_.emplace(assemble_heat_bounded(grid_.nx(), grid_.dx(), dt, params_.D));
    } else if (dt != dt_) {
        solver_->set_shift(grid_.dx() * grid_.dx() / dt);
    }
    dt_ = dt;
    return *solver_;
}

double HalfLineStepper::simplified_rate(std::span<const double> rho) const {
    return params_.chi * std::abs(rho.front()) / grid_.dx();
}

double HalfLineStepper::exchange_rate(const SimState& state) const {
    const double dx = grid_.dx();
    return std::max({params_.chi * std::abs(state.mu.front()) / dx, params_.k_on / dx, params_.k_off});
}

std::vector<double> HalfLineStepper::step_simplified(std::span<const double> rho, double dt) {
    if (rho.size() != grid_.nx()) throw std::invalid_argument("step_simplified: size mismatch");
    if (!(dt > 0.0)) throw std::invalid_argument("step_simplified: dt must be > 0");
    const double u = -params_.chi * rho.front();
    require_cfl(std::abs(u), grid_.dx(), dt);
    const auto faces = FaceVelocities1D::constant_bounded(grid_.nx(), u);
    auto out = solver_for(dt).solve(explicit_rhs_1d(grid_, rho, faces, dt), tol_).x;
    require_finite(out, "step_simplified_halfline");
    return out;
}

SimState HalfLineStepper::step_exchange(const SimState& state, double dt) {
    if (state.rho.size() != grid_.nx() || state.mu.size() != 1) {
        throw std::invalid_argument("step_exchange: state does not match the half-line grid");
    }
    if (!(dt > 0.0)) throw std::invalid_argument("step_exchange: dt must be > 0");
    if (dt * params_.k_off > 1.0) throw PositivityStepViolation(dt * params_.k_off);
    const double mu_old = state.mu.front();
    const double u = -params_.chi * mu_old;
    require_cfl(std::abs(u), grid_.dx(), dt);

    const double mu_new = mu_old + dt * (params_.k_on * state.rho.front() - params_.k_off * mu_old);
    const auto faces = FaceVelocities1D::constant_bounded(grid_.nx(), u);
    const double wall_flux = (mu_new - mu_old) / dt;

    SimState next;
    next.rho = solver_for(dt).solve(explicit_rhs_1d(grid_, state.rho, faces, dt, wall_flux, 0.0), tol_).x;
    next.mu = {mu_new};
    next.t = state.t + dt;
    next.step = state.step + 1;
    require_finite(next.rho, "step_exchange_halfline");
    require_finite(next.mu, "step_exchange_halfline");
    return next;
}

std::vector<double> step_simplified_halfline(const Grid1D& grid, std::span<const double> rho,
                                             double dt, const Params& params) {
    HalfLineStepper stepper(grid, params);
    return stepper.step_simplified(rho, dt);
}

SimState step_exchange_halfline(const Grid1D& grid, const SimState& state, double dt,
                                const Params& params) {
    HalfLineStepper stepper(grid, params);
    return stepper.step_exchange(state, dt);
}

}  // namespace cellpol
