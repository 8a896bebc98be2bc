#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

namespace cellpol::detail {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

RowFft::RowFft(std::size_t n, std::size_t rows) : n_(n), rows_(rows) {
    const int len = static_cast<int>(n);
    const int half = static_cast<int>(n / 2 + 1);
    const int howmany = static_cast<int>(rows);
    std::vector<double> real(n * rows);
    std::vector<std::complex<double>> spec((n / 2 + 1) * rows);
    auto* cspec = reinterpret_cast<fftw_complex*>(spec.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_plan_ = fftw_plan_many_dft_r2c(1, &len, howmany, real.data(), nullptr, 1, len, cspec, nullptr, 1, half,
                                           flags);
    inverse_plan_ = fftw_plan_many_dft_c2r(1, &len, howmany, cspec, nullptr, 1, half, real.data(), nullptr, 1, len,
                                           flags);
}

RowFft::~RowFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

const RowFft& RowFft::get(std::size_t n, std::size_t rows) {
    std::mutex& mutex = planner_mutex();  // constructed before, destroyed after the cache
    static std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<RowFft>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{n, rows}];
    if (!slot) slot.reset(new RowFft(n, rows));
    return *slot;
}

void RowFft::forward(const double* in, std::complex<double>* out) const {
    fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in),
                         reinterpret_cast<fftw_complex*>(out));
}

void RowFft::inverse(std::complex<double>* in, double* out) const {
    fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), reinterpret_cast<fftw_complex*>(in), out);
}

}  // namespace cellpol::detail
