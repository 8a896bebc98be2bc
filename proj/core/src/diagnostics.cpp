#include "cellpol/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cellpol/scheme1d.hpp"

namespace cellpol {

double total_mass(const SimState& state, const Grid2D& grid) {
    const double bulk = std::accumulate(state.rho.begin(), state.rho.end(), 0.0);
    const double wall = std::accumulate(state.mu.begin(), state.mu.end(), 0.0);
    return bulk * grid.cell_area() + wall * grid.dy();
}

double total_mass(const SimState& state, const Grid1D& grid) {
    const double bulk = std::accumulate(state.rho.begin(), state.rho.end(), 0.0);
    const double wall = std::accumulate(state.mu.begin(), state.mu.end(), 0.0);
    return bulk * grid.dx() + wall;
}

double polarisation_index(std::span<const double> mu) {
    if (mu.empty()) throw std::invalid_argument("polarisation_index: empty distribution");
    const double n = static_cast<double>(mu.size());
    double total = 0.0;
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
        if (mu[k] < 0.0) throw std::invalid_argument("polarisation_index: negative entry");
        const double angle = 2.0 * kPi * static_cast<double>(k) / n;
        total += mu[k];
        re += mu[k] * std::cos(angle);
        im += mu[k] * std::sin(angle);
    }
    if (!(total > 0.0)) throw std::invalid_argument("polarisation_index: all-zero distribution");
    return std::min(1.0, std::hypot(re, im) / total);
}

namespace {

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double relative_rate(std::span<const double> a, std::span<const double> b, double dt) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    if (a.empty()) return 0.0;
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(b[i] - a[i]));
    if (diff == 0.0) return 0.0;
    const double scale = std::max(max_abs(a), max_abs(b));
    return diff / (scale * dt);
}

}  // namespace

bool detect_steady(const History& history, double window, double tol) {
    if (history.size() < 2) return false;
    const double t_end = history.back().t;
    if (history.front().t > t_end - window) return false;

    std::size_t first = history.size() - 1;
    while (first > 0 && history[first].t > t_end - window) --first;
    for (std::size_t i = first; i + 1 < history.size(); ++i) {
        const auto& a = history[i];
        const auto& b = history[i + 1];
        const double dt = b.t - a.t;
        if (!(dt > 0.0)) continue;
        if (relative_rate(a.rho, b.rho, dt) >= tol) return false;
        if (relative_rate(a.mu, b.mu, dt) >= tol) return false;
    }
    return true;
}

std::string to_string(VerdictClass v) {
    switch (v) {
        case VerdictClass::Homogeneous: return "homogeneous";
        case VerdictClass::Polarised: return "polarised";
        case VerdictClass::BlowUpSuspected: return "blow-up-suspected";
        case VerdictClass::Undecided: return "undecided";
    }
    return "undecided";
}

int exit_code(VerdictClass v) {
    switch (v) {
        case VerdictClass::Homogeneous: return 0;
        case VerdictClass::Polarised: return 2;
        case VerdictClass::BlowUpSuspected: return 3;
        case VerdictClass::Undecided: return 4;
    }
    return 4;
}

RunVerdict classify_run(const RunRecord& record, const Thresholds& thresholds) {
    RunVerdict v;
    v.peak_density = record.peak_density;
    v.conservation_defect = record.conservation_defect;
    v.dt_floor_hit = record.dt_floor_hit;
    if (!record.history.empty()) {
        const Snapshot& last = record.history.back();
        v.final_time = last.t;
        std::span<const double> dist;
        if (record.index_source == IndexSource::Mu) dist = last.mu;
        if (record.index_source == IndexSource::Rho) dist = last.rho;
        const bool usable = !dist.empty() &&
                            std::all_of(dist.begin(), dist.end(), [](double x) { return x >= 0.0; }) &&
                            std::any_of(dist.begin(), dist.end(), [](double x) { return x > 0.0; });
        if (usable) v.polarisation_index = polarisation_index(dist);
        v.peak_density = std::max(v.peak_density, std::max(max_abs(last.rho), max_abs(last.mu)));
    }
    v.steady = detect_steady(record.history, thresholds.steady_window, thresholds.steady_tol);

    if (v.peak_density >= thresholds.blowup_guard || record.dt_floor_hit) {
        v.cls = VerdictClass::BlowUpSuspected;
    } else if (v.steady && v.polarisation_index >= thresholds.polarised) {
        v.cls = VerdictClass::Polarised;
    } else if (v.steady && v.polarisation_index < thresholds.homogeneous) {
        v.cls = VerdictClass::Homogeneous;
    } else {
        v.cls = VerdictClass::Undecided;
    }
    return v;
}

CriticalMassEstimate estimate_critical_mass(const MassProbe& probe, double lo, double hi,
                                            double tol, std::size_t budget) {
    if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("estimate_critical_mass: need 0 < lo < hi");
    if (!(tol > 0.0)) throw std::invalid_argument("estimate_critical_mass: tol must be > 0");

    CriticalMassEstimate est;
    auto lo_future = std::async(std::launch::async, probe, lo);
    const VerdictClass hi_verdict = probe(hi);
    const VerdictClass lo_verdict = lo_future.get();
    est.audit.push_back({0, lo, lo_verdict});
    est.audit.push_back({1, hi, hi_verdict});

    const bool lo_ok = lo_verdict == VerdictClass::Homogeneous;
    const bool hi_ok = hi_verdict == VerdictClass::Polarised || hi_verdict == VerdictClass::BlowUpSuspected;
    if (!lo_ok || !hi_ok) {
        throw std::invalid_argument("estimate_critical_mass: invalid bracket (lo is " + to_string(lo_verdict) +
                                    ", hi is " + to_string(hi_verdict) + ")");
    }

    std::size_t used = 0;
    while (hi - lo > tol && used < budget) {
        const double mid = 0.5 * (lo + hi);
        const VerdictClass v = probe(mid);
        est.audit.push_back({est.audit.size(), mid, v});
        if (v == VerdictClass::Homogeneous) {
            lo = mid;
        } else {
            hi = mid;
        }
        ++used;
    }
    est.lo = lo;
    est.hi = hi;
    est.mass = 0.5 * (lo + hi);
    est.converged = hi - lo <= tol;
    return est;
}

ConvergenceStudy fit_order(std::vector<double> h, std::vector<double> errors) {
    if (h.size() != errors.size() || h.size() < 2) throw std::invalid_argument("fit_order: need >= 2 points");
    ConvergenceStudy s;
    s.h = std::move(h);
    s.errors = std::move(errors);
    s.exact = std::all_of(s.errors.begin(), s.errors.end(), [](double e) { return e == 0.0; });
    if (s.exact) {
        s.order = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    const double n = static_cast<double>(s.h.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < s.h.size(); ++i) {
        const double x = std::log(s.h[i]);
        const double y = std::log(s.errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    s.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return s;
}

ConvergenceStudy convergence_order(const std::function<double(std::size_t)>& error_at,
                                   std::span<const std::size_t> resolutions, double length) {
    if (resolutions.size() < 3) throw std::invalid_argument("convergence_order: need >= 3 resolutions");
    std::vector<double> h, e;
    for (std::size_t n : resolutions) {
        h.push_back(length / static_cast<double>(n));
        e.push_back(error_at(n));
    }
    return fit_order(std::move(h), std::move(e));
}

double ManufacturedKernel::exact(double x, double t) const {
    if (amplitude == 0.0) return 0.0;
    const double spread = 4.0 * D * t;
    const double centre = x0 + velocity * (t - t0);
    double sum = 0.0;
    for (int m = -4; m <= 4; ++m) {
        const double d = x - centre - static_cast<double>(m);
        sum += std::exp(-d * d / spread);
    }
    return amplitude * sum / std::sqrt(kPi * spread);
}

double ManufacturedKernel::l1_error(std::size_t n) const {
    const Grid1D grid = Grid1D::periodic(n, 1.0);
    const double dx = grid.dx();
    const double nominal = diffusive_scaling ? dt_factor * dx * dx : dt_factor * dx;
    const auto steps = static_cast<std::size_t>(std::ceil(duration / nominal - 1e-9));
    const double dt = duration / static_cast<double>(steps);

    std::vector<double> rho(n);
    for (std::size_t i = 0; i < n; ++i) rho[i] = exact(grid.center(i), t0);
    PeriodicStepper stepper(grid, D);
    const auto u = FaceVelocities1D::constant_periodic(n, velocity);
    for (std::size_t s = 0; s < steps; ++s) rho = stepper.step(rho, u, dt);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err += std::abs(rho[i] - exact(grid.center(i), t0 + duration)) * dx;
    return err;
}

ConvergenceStudy convergence_order(const ManufacturedKernel& kernel,
                                   std::span<const std::size_t> resolutions) {
    return convergence_order([&](std::size_t n) { return kernel.l1_error(n); }, resolutions, 1.0);
}

}  // namespace cellpol
