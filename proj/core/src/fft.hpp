#pragma once

#include <complex>
#include <cstddef>

namespace cellpol::detail {

/**
 * Batched real transforms of `rows` contiguous rows of length n (FFTW plans).
 * forward writes n/2+1 coefficients per row; inverse is unnormalised (times n).
 * Plans are created once per (n, rows) and shared; execution is thread safe.
 */
class RowFft {
public:
    static const RowFft& get(std::size_t n, std::size_t rows);

    std::size_t length() const { return n_; }
    std::size_t rows() const { return rows_; }
    std::size_t spectrum_length() const { return n_ / 2 + 1; }

    void forward(const double* in, std::complex<double>* out) const;
    /// Overwrites `in`.
    void inverse(std::complex<double>* in, double* out) const;

    RowFft(const RowFft&) = delete;
    RowFft& operator=(const RowFft&) = delete;
    ~RowFft();

private:
    RowFft(std::size_t n, std::size_t rows);

    std::size_t n_;
    std::size_t rows_;
    void* forward_plan_;
    void* inverse_plan_;
};

}  // namespace cellpol::detail
