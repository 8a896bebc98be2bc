#include "cellpol/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include <complex>

#include "fft.hpp"

namespace cellpol {

SparseMatrix::SparseMatrix(std::size_t n, std::vector<Triplet> triplets) : n_(n) {
    for (const auto& t : triplets) {
        if (t.row >= n || t.col >= n) throw std::out_of_range("SparseMatrix: triplet out of range");
    }
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    row_ptr_.assign(n + 1, 0);
    for (std::size_t i = 0; i < triplets.size(); ++i) {
        const auto& t = triplets[i];
        if (!cols_.empty() && i > 0 && triplets[i - 1].row == t.row && triplets[i - 1].col == t.col) {
            values_.back() += t.value;
            continue;
        }
        cols_.push_back(t.col);
        values_.push_back(t.value);
        ++row_ptr_[t.row + 1];
    }
    std::partial_sum(row_ptr_.begin(), row_ptr_.end(), row_ptr_.begin());
}

void SparseMatrix::apply(std::span<const double> in, std::span<double> out) const {
    if (in.size() != n_ || out.size() != n_) throw std::invalid_argument("SparseMatrix::apply size");
    for (std::size_t i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) acc += values_[p] * in[cols_[p]];
        out[i] = acc;
    }
}

std::vector<double> SparseMatrix::apply(std::span<const double> in) const {
    std::vector<double> out(n_);
    apply(in, out);
    return out;
}

double SparseMatrix::entry(std::size_t i, std::size_t j) const {
    if (i >= n_ || j >= n_) throw std::out_of_range("SparseMatrix::entry");
    const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    return (it != last && *it == j) ? values_[static_cast<std::size_t>(it - cols_.begin())] : 0.0;
}

std::vector<double> SparseMatrix::to_dense() const {
    std::vector<double> dense(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) dense[i * n_ + cols_[p]] = values_[p];
    }
    return dense;
}

std::string to_string(SpdKind kind) {
    switch (kind) {
        case SpdKind::Heat1DPeriodic: return "heat-1d";
        case SpdKind::Heat1DBounded: return "heat-1d-bounded";
        case SpdKind::Diffusion2D: return "diffusion-2d";
        case SpdKind::Screened2D: return "screened-2d";
    }
    return "unknown";
}

SpdMatrix::Builder::Builder(std::size_t n, double shift) : n_(n), shift_(shift) {
    triplets_.reserve(5 * n);
    for (std::size_t i = 0; i < n; ++i) triplets_.push_back({i, i, shift});
}

void SpdMatrix::Builder::couple(std::size_t i, std::size_t j, double w) {
    if (i == j) throw std::invalid_argument("SpdMatrix::Builder: self coupling");
    triplets_.push_back({i, i, w});
    triplets_.push_back({j, j, w});
    triplets_.push_back({i, j, -w});
    triplets_.push_back({j, i, -w});
}

SpdMatrix SpdMatrix::Builder::build(SpdKind kind) && {
    return SpdMatrix(SparseMatrix(n_, std::move(triplets_)), kind, shift_);
}

namespace {

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be > 0");
}

// Couplings of the bounded x periodic 5-point stencil; x weight wx, y weight wy.
void couple_2d(SpdMatrix::Builder& b, const Grid2D& grid, double wx, double wy) {
    const std::size_t nx = grid.nx();
    const std::size_t ny = grid.ny();
    for (std::size_t j = 0; j < nx; ++j) {
        for (std::size_t k = 0; k < ny; ++k) {
            const std::size_t i = grid.index(j, k);
            b.couple(i, grid.index(j, (k + 1) % ny), wy);
            if (j + 1 < nx) b.couple(i, grid.index(j + 1, k), wx);
        }
    }
}

}  // namespace

SpdMatrix assemble_heat_periodic(std::size_t nx, double dx, double dt, double D) {
    if (nx < 3) throw std::invalid_argument("assemble_heat_periodic: N_x must be >= 3");
    require_positive(dx, "dx");
    require_positive(dt, "dt");
    require_positive(D, "D");
    SpdMatrix::Builder b(nx, dx * dx / dt);
    for (std::size_t i = 0; i < nx; ++i) b.couple(i, (i + 1) % nx, D);
    return std::move(b).build(SpdKind::Heat1DPeriodic);
}

SpdMatrix assemble_heat_bounded(std::size_t nx, double dx, double dt, double D) {
    if (nx < 2) throw std::invalid_argument("assemble_heat_bounded: N_x must be >= 2");
    require_positive(dx, "dx");
    require_positive(dt, "dt");
    require_positive(D, "D");
    SpdMatrix::Builder b(nx, dx * dx / dt);
    for (std::size_t i = 0; i + 1 < nx; ++i) b.couple(i, i + 1, D);
    return std::move(b).build(SpdKind::Heat1DBounded);
}

SpdMatrix assemble_diffusion_2d(const Grid2D& grid, double dt, double D) {
    require_positive(dt, "dt");
    require_positive(D, "D");
    const double ratio = grid.dx() / grid.dy();
    SpdMatrix::Builder b(grid.cells(), grid.dx() * grid.dx() / dt);
    couple_2d(b, grid, D, D * ratio * ratio);
    return std::move(b).build(SpdKind::Diffusion2D);
}

SpdMatrix assemble_screened_2d(const Grid2D& grid, double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw std::invalid_argument("assemble_screened_2d: alpha must be > 0 (pure Neumann problem is singular)");
    }
    const double ratio = grid.dx() / grid.dy();
    SpdMatrix::Builder b(grid.cells(), alpha * grid.dx() * grid.dx());
    couple_2d(b, grid, 1.0, ratio * ratio);
    return std::move(b).build(SpdKind::Screened2D);
}

double norm2(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

namespace {

double norm_inf(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// r is the residual after the constant-mode correction.
void finish_direct(SolveResult& out, std::span<const double> r, std::span<const double> b, double bnorm,
                   double a_norm_inf, double tol) {
    out.report.iterations = 1;
    out.report.relative_residual = norm2(r) / bnorm;
    out.report.backward_error = norm_inf(r) / (a_norm_inf * norm_inf(out.x) + norm_inf(b));
    out.report.converged = out.report.backward_error <= tol;
    if (!out.report.converged) throw SolverFailure(out.report);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

// r = b - A x
void residual(const SpdMatrix& A, std::span<const double> x, std::span<const double> b,
              std::span<double> r) {
    A.apply(x, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
}

// x += mean(r)/s; leaves r stale.
void correct_constant_mode(const SpdMatrix& A, std::span<double> x, std::span<const double> r) {
    const double mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
    const double shift = mean / A.shift();
    for (double& v : x) v += shift;
}

}  // namespace

SolveResult solve_spd(const SpdMatrix& A, std::span<const double> b, double tol,
                      std::span<const double> x0, std::size_t max_iter) {
    const std::size_t n = A.size();
    if (b.size() != n) throw std::invalid_argument("solve_spd: rhs size mismatch");
    if (!(tol > 0.0)) throw std::invalid_argument("solve_spd: tol must be > 0");
    if (!x0.empty() && x0.size() != n) throw std::invalid_argument("solve_spd: x0 size mismatch");
    if (max_iter == 0) max_iter = std::max<std::size_t>(1000, 10 * n);

    SolveResult out;
    out.report.method = "pcg-jacobi";
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        out.x.assign(n, 0.0);
        out.report.converged = true;
        return out;
    }

    std::vector<double> x(n, 0.0);
    if (!x0.empty()) std::copy(x0.begin(), x0.end(), x.begin());
    std::vector<double> inv_diag(n);
    for (std::size_t i = 0; i < n; ++i) inv_diag[i] = 1.0 / A.matrix().diagonal(i);

    std::vector<double> r(n), z(n), p(n), q(n);
    residual(A, x, b, r);
    double rnorm = norm2(r);
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);

    std::size_t it = 0;
    // A little below tol so the exact constant-mode correction has room.
    const double target = 0.5 * tol * bnorm;
    while (rnorm > target && it < max_iter) {
        A.apply(p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0)) break;
        const double step = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += step * p[i];
            r[i] -= step * q[i];
        }
        ++it;
        // Recompute the true residual periodically to avoid drift of the recursion.
        if (it % 50 == 0) residual(A, x, b, r);
        rnorm = norm2(r);
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }

    residual(A, x, b, r);
    correct_constant_mode(A, x, r);
    residual(A, x, b, r);

    out.report.iterations = it;
    out.report.relative_residual = norm2(r) / bnorm;
    out.report.converged = out.report.relative_residual <= tol;
    if (!out.report.converged) throw SolverFailure(out.report);
    out.x = std::move(x);
    return out;
}

SeparableSolver2D::SeparableSolver2D(const Grid2D& grid, double wx, double wy, double shift)
    : nx_(grid.nx()), ny_(grid.ny()), wx_(wx), wy_(wy) {
    require_positive(wx, "wx");
    require_positive(wy, "wy");
    set_shift(shift);
}

SeparableSolver2D SeparableSolver2D::diffusion(const Grid2D& grid, double dt, double D) {
    require_positive(dt, "dt");
    require_positive(D, "D");
    const double ratio = grid.dx() / grid.dy();
    return SeparableSolver2D(grid, D, D * ratio * ratio, grid.dx() * grid.dx() / dt);
}

SeparableSolver2D SeparableSolver2D::screened(const Grid2D& grid, double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw std::invalid_argument("SeparableSolver2D::screened: alpha must be > 0");
    }
    const double ratio = grid.dx() / grid.dy();
    return SeparableSolver2D(grid, 1.0, ratio * ratio, alpha * grid.dx() * grid.dx());
}

void SeparableSolver2D::set_shift(double shift) {
    require_positive(shift, "shift");
    if (shift == shift_ && !cprime_.empty()) return;
    shift_ = shift;
    norm_inf_ = shift_ + 4.0 * (wx_ + wy_);
    const std::size_t modes = ny_ / 2 + 1;
    cprime_.assign(modes * nx_, 0.0);
    inv_pivot_.assign(modes * nx_, 0.0);
    const double off = -wx_;
    for (std::size_t m = 0; m < modes; ++m) {
        const double lambda = 2.0 - 2.0 * std::cos(2.0 * kPi * static_cast<double>(m) / static_cast<double>(ny_));
        double* cp = &cprime_[m * nx_];
        double* ip = &inv_pivot_[m * nx_];
        for (std::size_t j = 0; j < nx_; ++j) {
            const double degree = static_cast<double>((j > 0) + (j + 1 < nx_));
            double pivot = shift_ + wy_ * lambda + wx_ * degree;
            if (j > 0) pivot -= off * cp[j - 1];
            ip[j] = 1.0 / pivot;
            cp[j] = off * ip[j];
        }
    }
}

std::vector<double> SeparableSolver2D::apply(std::span<const double> x) const {
    if (x.size() != size()) throw std::invalid_argument("SeparableSolver2D::apply: size mismatch");
    std::vector<double> y(size());
    for (std::size_t j = 0; j < nx_; ++j) {
        const double* row = x.data() + j * ny_;
        double* out = y.data() + j * ny_;
        for (std::size_t k = 0; k < ny_; ++k) {
            const double left = row[k == 0 ? ny_ - 1 : k - 1];
            const double right = row[k + 1 == ny_ ? 0 : k + 1];
            out[k] = shift_ * row[k] + wy_ * (2.0 * row[k] - left - right);
        }
        if (j > 0) {
            for (std::size_t k = 0; k < ny_; ++k) out[k] += wx_ * (row[k] - row[k - ny_]);
        }
        if (j + 1 < nx_) {
            for (std::size_t k = 0; k < ny_; ++k) out[k] += wx_ * (row[k] - row[k + ny_]);
        }
    }
    return y;
}

SolveResult SeparableSolver2D::solve(std::span<const double> b, double tol) const {
    const std::size_t n = size();
    if (b.size() != n) throw std::invalid_argument("SeparableSolver2D::solve: rhs size mismatch");
    SolveResult out;
    out.report.method = "fft-thomas";
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        out.x.assign(n, 0.0);
        out.report.converged = true;
        return out;
    }

    const auto& fft = detail::RowFft::get(ny_, nx_);
    const std::size_t modes = fft.spectrum_length();
    std::vector<std::complex<double>> spec(modes * nx_);
    fft.forward(b.data(), spec.data());

    const double off = -wx_;
    for (std::size_t m = 0; m < modes; ++m) {
        const double* cp = &cprime_[m * nx_];
        const double* ip = &inv_pivot_[m * nx_];
        spec[m] *= ip[0];
        for (std::size_t j = 1; j < nx_; ++j) {
            spec[m + j * modes] = (spec[m + j * modes] - off * spec[m + (j - 1) * modes]) * ip[j];
        }
        for (std::size_t j = nx_ - 1; j-- > 0;) spec[m + j * modes] -= cp[j] * spec[m + (j + 1) * modes];
    }

    out.x.resize(n);
    fft.inverse(spec.data(), out.x.data());
    const double scale = 1.0 / static_cast<double>(ny_);
    for (double& v : out.x) v *= scale;

    // A*1 = shift*1, so moving x by mean(r)/shift lowers every residual entry by mean(r).
    auto r = apply(out.x);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = b[i] - r[i];
        mean += r[i];
    }
    mean /= static_cast<double>(n);
    for (double& v : out.x) v += mean / shift_;
    for (double& v : r) v -= mean;

    finish_direct(out, r, b, bnorm, norm_inf_, tol);
    return out;
}

TridiagonalSolver::TridiagonalSolver(const SpdMatrix& A) : shift_(A.shift()) {
    const std::size_t n = A.size();
    if (n < 3) throw std::invalid_argument("TridiagonalSolver: need at least 3 unknowns");
    const SparseMatrix& m = A.matrix();
    diag_.assign(n, 0.0);
    off_.assign(n - 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = m.row_ptr()[i]; p < m.row_ptr()[i + 1]; ++p) {
            const std::size_t j = m.cols()[p];
            const double v = m.values()[p];
            if (j == i) {
                diag_[i] = v;
            } else if (j == i + 1) {
                off_[i] = v;
            } else if (j + 1 == i) {
                // symmetric, stored once
            } else if (i == 0 && j == n - 1) {
                corner_ = v;
            } else if (!(i == n - 1 && j == 0)) {
                throw std::invalid_argument("TridiagonalSolver: matrix is not (cyclic) tridiagonal");
            }
        }
    }

    factor();
}

void TridiagonalSolver::set_shift(double shift) {
    if (!(shift > 0.0)) throw std::invalid_argument("TridiagonalSolver: shift must be > 0");
    if (shift == shift_) return;
    for (double& d : diag_) d += shift - shift_;
    shift_ = shift;
    factor();
}

void TridiagonalSolver::factor() {
    const std::size_t n = size();
    norm_inf_ = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i > 0 ? off_[i - 1] : corner_;
        const double right = i + 1 < n ? off_[i] : corner_;
        norm_inf_ = std::max(norm_inf_, std::abs(diag_[i]) + std::abs(left) + std::abs(right));
    }
    // Cyclic case: A = T + u u^T / gamma with u = (gamma, 0, ..., 0, corner).
    std::vector<double> d = diag_;
    if (periodic()) {
        gamma_ = -diag_[0];
        d[0] -= gamma_;
        d[n - 1] -= corner_ * corner_ / gamma_;
    }
    cprime_.assign(n, 0.0);
    inv_pivot_.assign(n, 0.0);
    double piv = d[0];
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) piv = d[i] - off_[i - 1] * cprime_[i - 1];
        if (piv == 0.0) throw std::invalid_argument("TridiagonalSolver: zero pivot");
        inv_pivot_[i] = 1.0 / piv;
        if (i + 1 < n) cprime_[i] = off_[i] * inv_pivot_[i];
    }
    if (periodic()) {
        z_.assign(n, 0.0);
        z_[0] = gamma_;
        z_[n - 1] = corner_;
        thomas(z_);
        denom_ = 1.0 + z_[0] + corner_ * z_[n - 1] / gamma_;
    }
}

void TridiagonalSolver::thomas(std::vector<double>& x) const {
    const std::size_t n = x.size();
    x[0] *= inv_pivot_[0];
    for (std::size_t i = 1; i < n; ++i) x[i] = (x[i] - off_[i - 1] * x[i - 1]) * inv_pivot_[i];
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= cprime_[i] * x[i + 1];
}

std::vector<double> TridiagonalSolver::apply(std::span<const double> x) const {
    const std::size_t n = size();
    if (x.size() != n) throw std::invalid_argument("TridiagonalSolver::apply: size mismatch");
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag_[i] * x[i];
        if (i + 1 < n) s += off_[i] * x[i + 1];
        if (i > 0) s += off_[i - 1] * x[i - 1];
        y[i] = s;
    }
    y[0] += corner_ * x[n - 1];
    y[n - 1] += corner_ * x[0];
    return y;
}

SolveResult TridiagonalSolver::solve(std::span<const double> b, double tol) const {
    const std::size_t n = size();
    if (b.size() != n) throw std::invalid_argument("TridiagonalSolver::solve: rhs size mismatch");
    SolveResult out;
    out.report.method = periodic() ? "cyclic-thomas" : "thomas";
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        out.x.assign(n, 0.0);
        out.report.converged = true;
        return out;
    }
    out.x.assign(b.begin(), b.end());
    thomas(out.x);
    if (periodic()) {
        const double f = (out.x[0] + corner_ * out.x[n - 1] / gamma_) / denom_;
        for (std::size_t i = 0; i < n; ++i) out.x[i] -= f * z_[i];
    }

    auto r = apply(out.x);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = b[i] - r[i];
        mean += r[i];
    }
    mean /= static_cast<double>(n);
    for (double& v : out.x) v += mean / shift_;
    for (double& v : r) v -= mean;

    finish_direct(out, r, b, bnorm, norm_inf_, tol);
    return out;
}

void write_coordinate(std::ostream& os, const SparseMatrix& m, const std::string& label) {
    os << "# " << (label.empty() ? "matrix" : label) << " n=" << m.size() << " nnz=" << m.nonzeros() << '\n';
    os << "# columns: row col value (1-based)\n";
    char buf[64];
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t p = m.row_ptr()[i]; p < m.row_ptr()[i + 1]; ++p) {
            std::snprintf(buf, sizeof buf, "%.17g", m.values()[p]);
            os << (i + 1) << ' ' << (m.cols()[p] + 1) << ' ' << buf << '\n';
        }
    }
}

}  // namespace cellpol
