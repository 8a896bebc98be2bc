#include "cellpol/heuristic.hpp"

#include <complex>
#include <stdexcept>

#include "fft.hpp"

namespace cellpol {

double heuristic_critical_mass(const Params& params) {
    if (!params.S_is_constant()) {
        throw std::invalid_argument("heuristic_critical_mass needs a constant S");
    }
    const double denom = params.S.front() * params.chi * params.k_on;
    if (!(denom > 0.0)) throw std::invalid_argument("heuristic_critical_mass: S*chi*k_on must be > 0");
    return 2.0 * kPi * params.D * params.k_off / denom;
}

std::vector<double> hilbert_periodic(std::span<const double> f, double dy) {
    const std::size_t n = f.size();
    if (n < 4) throw std::invalid_argument("hilbert_periodic: need at least 4 samples");
    if (!(dy > 0.0)) throw std::invalid_argument("hilbert_periodic: dy must be > 0");

    // H kills constants; shifting by f[0] makes constant input transform to exact zeros.
    std::vector<double> g(f.begin(), f.end());
    for (double& v : g) v -= f[0];
    const auto& fft = detail::RowFft::get(n, 1);
    std::vector<std::complex<double>> spec(fft.spectrum_length());
    fft.forward(g.data(), spec.data());

    const std::complex<double> minus_i(0.0, -1.0);
    spec[0] = 0.0;
    for (std::size_t m = 1; m < spec.size(); ++m) spec[m] *= minus_i;
    if (n % 2 == 0) spec[n / 2] = 0.0;

    std::vector<double> out(n);
    fft.inverse(spec.data(), out.data());
    for (double& v : out) v /= static_cast<double>(n);
    return out;
}

Grid1D reduced_grid(std::size_t ny, double r) {
    return Grid1D::periodic(ny, 2.0 * kPi * r);
}

ReducedStepper::ReducedStepper(Grid1D circle, Params params, double tol)
    : grid_(circle), params_(std::move(params)), periodic_(circle, params_.D, tol) {
    params_.validate(grid_.nx());
}

FaceVelocities1D ReducedStepper::velocities(std::span<const double> nu) const {
    const std::size_t n = grid_.nx();
    if (nu.size() != n) throw std::invalid_argument("ReducedStepper: nu size mismatch");
    std::vector<double> s_nu(n);
    for (std::size_t k = 0; k < n; ++k) s_nu[k] = params_.S_at(k) * nu[k];
    const auto h = hilbert_periodic(s_nu, grid_.dx());
    const double gain = -params_.chi * params_.k_on / params_.k_off;

    // Face f sits between nodes f-1 and f; face 0 and face n coincide.
    std::vector<double> faces(n + 1);
    for (std::size_t f = 1; f < n; ++f) faces[f] = 0.5 * gain * (h[f - 1] + h[f]);
    faces[0] = 0.5 * gain * (h[n - 1] + h[0]);
    faces[n] = faces[0];
    return FaceVelocities1D::periodic(std::move(faces));
}

double ReducedStepper::rate(std::span<const double> nu) const {
    return periodic_rate(velocities(nu), grid_.dx());
}

ReducedState ReducedStepper::step(const ReducedState& state, double dt) {
    ReducedState next;
    next.nu = periodic_.step(state.nu, velocities(state.nu), dt);
    next.t = state.t + dt;
    return next;
}

ReducedState step_reduced(const Grid1D& circle, const ReducedState& state, double dt,
                          const Params& params) {
    ReducedStepper stepper(circle, params);
    return stepper.step(state, dt);
}

}  // namespace cellpol
