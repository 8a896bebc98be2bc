#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cellpol/core_types.hpp"

namespace cellpol {

/// Compressed-row sparse matrix with sorted, duplicate-free columns.
class SparseMatrix {
public:
    struct Triplet {
        std::size_t row;
        std::size_t col;
        double value;
    };

    SparseMatrix() = default;
    /// Duplicates are summed.
    SparseMatrix(std::size_t n, std::vector<Triplet> triplets);

    std::size_t size() const { return n_; }
    std::size_t nonzeros() const { return values_.size(); }

    /// out = this * in; out must not alias in.
    void apply(std::span<const double> in, std::span<double> out) const;
    std::vector<double> apply(std::span<const double> in) const;

    double entry(std::size_t i, std::size_t j) const;
    double diagonal(std::size_t i) const { return entry(i, i); }
    std::vector<double> to_dense() const;  ///< row-major n*n

    std::span<const std::size_t> row_ptr() const { return row_ptr_; }
    std::span<const std::size_t> cols() const { return cols_; }
    std::span<const double> values() const { return values_; }

private:
    std::size_t n_{0};
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> cols_;
    std::vector<double> values_;
};

enum class SpdKind { Heat1DPeriodic, Heat1DBounded, Diffusion2D, Screened2D };

std::string to_string(SpdKind kind);

/**
 * Symmetric positive definite operator of the form s*I + L where L is a sum of
 * symmetric two-point couplings (a weighted graph Laplacian). Every row of such
 * an operator sums to s, so A*1 = s*1.
 */
class SpdMatrix {
public:
    /// Accumulates couplings so that symmetry holds by construction.
    class Builder {
    public:
        Builder(std::size_t n, double shift);
        /// Adds w to (i,i) and (j,j), -w to (i,j) and (j,i).
        void couple(std::size_t i, std::size_t j, double w);
        SpdMatrix build(SpdKind kind) &&;

    private:
        std::size_t n_;
        double shift_;
        std::vector<SparseMatrix::Triplet> triplets_;
    };

    const SparseMatrix& matrix() const { return matrix_; }
    std::size_t size() const { return matrix_.size(); }
    SpdKind kind() const { return kind_; }
    /// Common row sum s (dx^2/dt for heat and diffusion, alpha*dx^2 for screened).
    double shift() const { return shift_; }

    void apply(std::span<const double> in, std::span<double> out) const { matrix_.apply(in, out); }
    std::vector<double> apply(std::span<const double> in) const { return matrix_.apply(in); }
    double entry(std::size_t i, std::size_t j) const { return matrix_.entry(i, j); }

private:
    SpdMatrix(SparseMatrix m, SpdKind kind, double shift)
        : matrix_(std::move(m)), kind_(kind), shift_(shift) {}

    SparseMatrix matrix_;
    SpdKind kind_{SpdKind::Heat1DPeriodic};
    double shift_{0.0};
};

/// Periodic 1D heat matrix in the scaling dx^2/dt*I + D*tridiag(-1,2,-1) with corner couplings.
SpdMatrix assemble_heat_periodic(std::size_t nx, double dx, double dt, double D = 1.0);
/// Same stencil with zero-flux ends instead of the periodic wrap.
SpdMatrix assemble_heat_bounded(std::size_t nx, double dx, double dt, double D = 1.0);
/// Implicit diffusion on the bounded x periodic grid, scaled by dx^2/dt:
/// dx^2/dt*I + D*(x-Laplacian + (dx/dy)^2 * y-Laplacian), zero flux in x.
SpdMatrix assemble_diffusion_2d(const Grid2D& grid, double dt, double D = 1.0);
/// -Laplacian + alpha on the bounded x periodic grid, scaled by dx^2; Neumann
/// data enters through the right-hand side only.
SpdMatrix assemble_screened_2d(const Grid2D& grid, double alpha);

struct LinearSolveReport {
    double relative_residual{0.0};  ///< ||A x - b|| / ||b||
    /// ||A x - b||_inf / (||A||_inf ||x||_inf + ||b||_inf); the acceptance test of the direct solvers
    double backward_error{0.0};
    std::size_t iterations{0};
    std::string method;
    bool converged{false};
};

class SolverFailure : public std::runtime_error {
public:
    explicit SolverFailure(LinearSolveReport report)
        : std::runtime_error("linear solve did not converge (" + report.method + ", " +
                             std::to_string(report.iterations) + " iterations, residual " +
                             std::to_string(report.relative_residual) + ", backward error " +
                             std::to_string(report.backward_error) + ")"),
          report_(std::move(report)) {}

    const LinearSolveReport& report() const { return report_; }

private:
    LinearSolveReport report_;
};

struct SolveResult {
    std::vector<double> x;
    LinearSolveReport report;
};

inline constexpr double kDefaultSolveTolerance = 1e-12;

/**
 * Jacobi-preconditioned conjugate gradients.
 *
 * After convergence the constant mode is corrected exactly: since A*1 = s*1,
 * adding mean(r)/s to x removes the mean of the residual r, which both lowers
 * ||r|| and makes sum(A x) == sum(b) to rounding. The schemes rely on this for
 * discrete mass conservation.
 *
 * Throws SolverFailure if the relative residual is above tol after max_iter
 * iterations (0 selects max(1000, 10 n)).
 */
SolveResult solve_spd(const SpdMatrix& A, std::span<const double> b,
                      double tol = kDefaultSolveTolerance,
                      std::span<const double> x0 = {}, std::size_t max_iter = 0);

/**
 * Direct solver for the 1D heat matrices: a symmetric tridiagonal system, with the
 * periodic corner couplings handled by a Sherman-Morrison update. Factors are
 * computed once at construction. Solves finish with the same exact constant-mode
 * correction as solve_spd.
 */
class TridiagonalSolver {
public:
    /// Throws std::invalid_argument if A has entries outside the band and the corners.
    explicit TridiagonalSolver(const SpdMatrix& A);

    std::size_t size() const { return diag_.size(); }
    bool periodic() const { return corner_ != 0.0; }
    double shift() const { return shift_; }
    /// Moves the diagonal to the new shift (A*1 = shift*1 is preserved) and refactors.
    void set_shift(double shift);
    std::vector<double> apply(std::span<const double> x) const;
    /// Throws SolverFailure if the relative residual exceeds tol.
    SolveResult solve(std::span<const double> b, double tol = kDefaultSolveTolerance) const;

private:
    void factor();
    void thomas(std::vector<double>& x) const;

    std::vector<double> diag_;
    std::vector<double> off_;  ///< off_[i] = A(i, i+1)
    double corner_{0.0};       ///< A(0, n-1)
    double shift_{0.0};
    std::vector<double> cprime_;
    std::vector<double> inv_pivot_;
    std::vector<double> z_;  ///< correction vector of the cyclic update
    double norm_inf_{0.0};
    double gamma_{0.0};
    double denom_{0.0};
};

/**
 * Direct solver for shift*I + wx*Tx + wy*Ly on the bounded x periodic grid, where Tx is
 * the zero-flux 1D Laplacian stencil in x and Ly the periodic one in y. This is the
 * structure of both assemble_diffusion_2d and assemble_screened_2d. A DFT along y
 * decouples the Fourier modes; each mode is a symmetric tridiagonal system in x
 * whose Thomas factors are computed once per shift.
 *
 * Solves finish with the same exact constant-mode correction as solve_spd.
 */
class SeparableSolver2D {
public:
    SeparableSolver2D(const Grid2D& grid, double wx, double wy, double shift);

    /// Same operator as assemble_diffusion_2d(grid, dt, D).
    static SeparableSolver2D diffusion(const Grid2D& grid, double dt, double D = 1.0);
    /// Same operator as assemble_screened_2d(grid, alpha).
    static SeparableSolver2D screened(const Grid2D& grid, double alpha);

    double shift() const { return shift_; }
    /// Refactors for a new shift; the couplings are unchanged.
    void set_shift(double shift);

    std::size_t size() const { return nx_ * ny_; }
    std::vector<double> apply(std::span<const double> x) const;
    /// Throws SolverFailure if the relative residual exceeds tol.
    SolveResult solve(std::span<const double> b, double tol = kDefaultSolveTolerance) const;

private:
    std::size_t nx_;
    std::size_t ny_;
    double wx_;
    double wy_;
    double shift_{0.0};
    double norm_inf_{0.0};        ///< row-sum bound shift + 4 wx + 4 wy
    std::vector<double> cprime_;  ///< per mode, Thomas upper factors
    std::vector<double> inv_pivot_;
};

double norm2(std::span<const double> v);

/// Writes "row col value" lines (1-based) with a header comment.
void write_coordinate(std::ostream& os, const SparseMatrix& m, const std::string& label = {});

}  // namespace cellpol
