#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cellpol/core_types.hpp"
#include "cellpol/scheme1d.hpp"

namespace cellpol {

/// Mass above which the line model aggregates: 2*pi*D*k_off / (S*chi*k_on).
/// Requires a constant S; throws std::invalid_argument when S*chi*k_on == 0.
double heuristic_critical_mass(const Params& params);

/**
 * Periodic Hilbert transform (conjugate function) of samples on a circle:
 * Fourier mode m is multiplied by -i*sign(m); the mean and, for even length,
 * the Nyquist mode are mapped to 0. The multiplier is scale free, dy only
 * documents the sampling.
 */
std::vector<double> hilbert_periodic(std::span<const double> f, double dy);

/// Boundary density nu on the circle of circumference ny*dy.
struct ReducedState {
    std::vector<double> nu;
    double t{0.0};
};

/**
 * Membrane-only model d_t nu = D nu_yy + chi*S*(k_on/k_off) d_y(nu H(nu)).
 *
 * Written in flux form with node velocity v = -chi*(k_on/k_off)*H(S nu),
 * averaged onto faces, and advanced with the periodic semi-implicit scheme.
 */
class ReducedStepper {
public:
    ReducedStepper(Grid1D circle, Params params, double tol = kDefaultSolveTolerance);

    const Grid1D& grid() const { return grid_; }

    FaceVelocities1D velocities(std::span<const double> nu) const;
    /// dt*rate <= 1 keeps nu nonnegative.
    double rate(std::span<const double> nu) const;
    ReducedState step(const ReducedState& state, double dt);

private:
    Grid1D grid_;
    Params params_;
    PeriodicStepper periodic_;
};

/// Grid of the reduced model: ny nodes on a circle of radius r.
Grid1D reduced_grid(std::size_t ny, double r);

ReducedState step_reduced(const Grid1D& circle, const ReducedState& state, double dt,
                          const Params& params);

}  // namespace cellpol
