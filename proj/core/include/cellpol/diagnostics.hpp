#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cellpol/core_types.hpp"

namespace cellpol {

/// sum(rho)*dx*dy + sum(mu)*dy.
double total_mass(const SimState& state, const Grid2D& grid);
/// sum(rho)*dx + mu; mu is a point mass at the membrane (absent without exchange).
double total_mass(const SimState& state, const Grid1D& grid);

/**
 * Normalised magnitude of the first circular harmonic,
 * |sum_k mu_k exp(2 pi i k / N)| / sum_k mu_k.
 * 0 for a uniform distribution, 1 for a single occupied node.
 * Throws std::invalid_argument for negative entries or zero total.
 */
double polarisation_index(std::span<const double> mu);

struct Snapshot {
    double t{0.0};
    std::vector<double> rho;
    std::vector<double> mu;
    std::vector<double> c_wall;  ///< potential on the wall row (2D only)
};
using History = std::vector<Snapshot>;

/**
 * True iff the history spans `window` of simulated time and, for every pair of
 * consecutive snapshots inside the trailing window, max|change| / (max|value| * dt)
 * of both rho and mu stays below tol.
 */
bool detect_steady(const History& history, double window, double tol);

enum class VerdictClass { Homogeneous, Polarised, BlowUpSuspected, Undecided };

std::string to_string(VerdictClass v);

/// Process exit code: 0 homogeneous, 2 polarised, 3 blow-up suspected, 4 undecided.
int exit_code(VerdictClass v);

struct Thresholds {
    double polarised{0.5};
    double homogeneous{0.05};
    double blowup_guard{1e6};
    double steady_window{5.0};
    double steady_tol{1e-6};
};

/// Which distribution carries the symmetry-breaking signal.
enum class IndexSource { Mu, Rho, None };

struct RunRecord {
    History history;
    IndexSource index_source{IndexSource::Mu};
    double peak_density{0.0};
    double conservation_defect{0.0};
    bool dt_floor_hit{false};
};

struct RunVerdict {
    VerdictClass cls{VerdictClass::Undecided};
    double polarisation_index{0.0};
    double final_time{0.0};
    double peak_density{0.0};
    double conservation_defect{0.0};
    bool dt_floor_hit{false};
    bool steady{false};
};

/**
 * Blow-up suspicion dominates (peak >= guard or dt floor hit). Otherwise a steady
 * run is polarised when its index is >= thresholds.polarised and homogeneous
 * when it is < thresholds.homogeneous; everything else is undecided.
 */
RunVerdict classify_run(const RunRecord& record, const Thresholds& thresholds);

struct BisectionProbe {
    std::size_t index{0};
    double mass{0.0};
    VerdictClass verdict{VerdictClass::Undecided};
};

struct CriticalMassEstimate {
    double mass{0.0};  ///< midpoint of the final bracket
    double lo{0.0};
    double hi{0.0};
    bool converged{false};  ///< bracket width <= tol within budget
    std::vector<BisectionProbe> audit;
};

using MassProbe = std::function<VerdictClass(double mass)>;

/**
 * Bisection on the total mass. A probe counts as "below" the threshold iff it is
 * homogeneous. The bracket ends are probed first (concurrently) and must differ:
 * lo homogeneous, hi polarised or blow-up suspected. budget caps the number of
 * interior probes.
 */
CriticalMassEstimate estimate_critical_mass(const MassProbe& probe, double lo, double hi,
                                            double tol, std::size_t budget);

struct ConvergenceStudy {
    std::vector<double> h;
    std::vector<double> errors;
    double order{0.0};
    bool exact{false};  ///< all errors zero; order is meaningless
};

/// Least-squares slope of log(error) against log(h).
ConvergenceStudy fit_order(std::vector<double> h, std::vector<double> errors);

/// Calls error_at(n) for each resolution n of a domain of the given length.
ConvergenceStudy convergence_order(const std::function<double(std::size_t)>& error_at,
                                   std::span<const std::size_t> resolutions, double length = 1.0);

/**
 * Periodic advection-diffusion on [0,1) started from the wrapped heat kernel at
 * time t0 centred at x0, compared against the exact shifted kernel at t0 + duration.
 */
struct ManufacturedKernel {
    double D{1.0};
    double velocity{0.0};
    double amplitude{1.0};
    double x0{0.5};
    double t0{0.01};
    double duration{0.01};
    /// dt = dt_factor*dx^2 if diffusive_scaling, else dt_factor*dx.
    double dt_factor{0.25};
    bool diffusive_scaling{true};

    double exact(double x, double t) const;
    /// L1 error of the periodic scheme on n cells.
    double l1_error(std::size_t n) const;
};

ConvergenceStudy convergence_order(const ManufacturedKernel& kernel,
                                   std::span<const std::size_t> resolutions);

}  // namespace cellpol
