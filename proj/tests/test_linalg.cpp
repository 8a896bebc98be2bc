#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <gtest/gtest.h>

#include "cellpol/linalg.hpp"
#include "oracles.hpp"

using namespace cellpol;

namespace {

oracle::Dense densify(const SpdMatrix& A) {
    oracle::Dense d(A.size());
    d.a = A.matrix().to_dense();
    return d;
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& gen, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = dist(gen);
    return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

std::vector<SpdMatrix> small_operators() {
    std::vector<SpdMatrix> out;
    out.push_back(assemble_heat_periodic(3, 1.0, 1.0));
    out.push_back(assemble_heat_periodic(9, 0.1, 0.003, 2.0));
    out.push_back(assemble_heat_bounded(7, 0.2, 0.01));
    out.push_back(assemble_diffusion_2d(build_grid_2d(1.0, 4, 5), 0.01));
    out.push_back(assemble_diffusion_2d(Grid2D::with_spacing(3, 4, 0.5, 0.5), 0.2, 0.7));
    out.push_back(assemble_screened_2d(build_grid_2d(1.0, 5, 4), 0.1));
    out.push_back(assemble_screened_2d(Grid2D::with_spacing(4, 4, 1.0, 1.0), 1.0));
    return out;
}

}  // namespace

TEST(HeatPeriodic, ThreeByThree) {
    const SpdMatrix A = assemble_heat_periodic(3, 1.0, 1.0);
    const double expected[3][3] = {{3, -1, -1}, {-1, 3, -1}, {-1, -1, 3}};
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(A.entry(i, j), expected[i][j]);
    }
    EXPECT_EQ(A.kind(), SpdKind::Heat1DPeriodic);
}

TEST(HeatPeriodic, DiagonalValue) {
    const SpdMatrix A = assemble_heat_periodic(4, 0.5, 0.125);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(A.entry(i, i), 4.0);
}

TEST(HeatPeriodic, MatchesDenseTranscription) {
    for (std::size_t n = 3; n <= 10; ++n) {
        const double dx = 1.0 / static_cast<double>(n), dt = 0.01;
        const auto A = densify(assemble_heat_periodic(n, dx, dt));
        const auto ref = oracle::heat_matrix(n, dx, dt);
        EXPECT_LT(max_abs_diff(A.a, ref.a), 1e-13) << "n = " << n;
    }
}

TEST(HeatBounded, MatchesDenseTranscription) {
    const auto A = densify(assemble_heat_bounded(6, 0.3, 0.05));
    EXPECT_LT(max_abs_diff(A.a, oracle::bounded_heat_matrix(6, 0.3, 0.05).a), 1e-13);
}

TEST(HeatPeriodic, RejectsDegenerateInput) {
    EXPECT_THROW(assemble_heat_periodic(2, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(assemble_heat_periodic(4, 0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(assemble_heat_periodic(4, 1.0, 0.0), std::invalid_argument);
}

TEST(Diffusion2D, MatchesBlockLayout) {
    for (auto [nx, ny] : {std::pair<std::size_t, std::size_t>{3, 3}, {4, 4}, {3, 5}, {5, 4}}) {
        const double h = 0.25, dt = 0.05;
        const Grid2D g = Grid2D::with_spacing(nx, ny, h, h);
        const auto A = densify(assemble_diffusion_2d(g, dt));
        const auto ref = oracle::diffusion_2d({nx, ny, h}, dt);
        EXPECT_LT(max_abs_diff(A.a, ref.a), 1e-13) << nx << "x" << ny;
    }
}

TEST(Diffusion2D, ConstantVectorScalesByShift) {
    const Grid2D g = build_grid_2d(1.0, 6, 8);
    const double dt = 0.003;
    const SpdMatrix A = assemble_diffusion_2d(g, dt);
    const std::vector<double> ones(g.cells(), 1.0);
    const auto y = A.apply(ones);
    for (double v : y) EXPECT_NEAR(v, g.dx() * g.dx() / dt, 1e-12);
}

TEST(Screened2D, MatchesBlockLayout) {
    const Grid2D g = Grid2D::with_spacing(4, 4, 0.5, 0.5);
    const auto A = densify(assemble_screened_2d(g, 0.3));
    const auto ref = oracle::screened_2d({4, 4, 0.5}, 0.3);
    EXPECT_LT(max_abs_diff(A.a, ref.a), 1e-13);
}

TEST(Screened2D, InteriorDiagonal) {
    const SpdMatrix A = assemble_screened_2d(Grid2D::with_spacing(3, 3, 1.0, 1.0), 1.0);
    const Grid2D g = Grid2D::with_spacing(3, 3, 1.0, 1.0);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(A.entry(g.index(1, k), g.index(1, k)), 5.0);
}

TEST(Screened2D, ConstantVectorScalesByAlpha) {
    const Grid2D g = build_grid_2d(1.0, 5, 7);
    const SpdMatrix A = assemble_screened_2d(g, 0.4);
    const auto y = A.apply(std::vector<double>(g.cells(), 2.0));
    for (double v : y) EXPECT_NEAR(v, 2.0 * 0.4 * g.dx() * g.dx(), 1e-14);
}

TEST(Screened2D, RejectsNonPositiveAlpha) {
    const Grid2D g = build_grid_2d(1.0, 4, 4);
    EXPECT_THROW(assemble_screened_2d(g, 0.0), std::invalid_argument);
    EXPECT_THROW(assemble_screened_2d(g, -1.0), std::invalid_argument);
}

TEST(SpdProperties, SymmetricExactly) {
    for (const auto& A : small_operators()) {
        const auto d = densify(A);
        for (std::size_t i = 0; i < d.n; ++i) {
            for (std::size_t j = 0; j < d.n; ++j) EXPECT_EQ(d(i, j), d(j, i));
        }
    }
}

TEST(SpdProperties, PositiveEigenvalues) {
    for (const auto& A : small_operators()) {
        const auto ev = oracle::symmetric_eigenvalues(densify(A));
        EXPECT_GT(ev.front(), 0.0) << to_string(A.kind());
    }
    const auto ev = oracle::symmetric_eigenvalues(densify(assemble_screened_2d(build_grid_2d(1.0, 8, 8), 0.05)));
    EXPECT_GT(ev.front(), 0.0);
}

TEST(SpdProperties, StrictlyDiagonallyDominant) {
    for (const auto& A : small_operators()) {
        const auto d = densify(A);
        for (std::size_t i = 0; i < d.n; ++i) {
            double off = 0.0;
            for (std::size_t j = 0; j < d.n; ++j) off += (j == i) ? 0.0 : std::abs(d(i, j));
            EXPECT_GT(d(i, i), off);
        }
    }
}

TEST(SpdProperties, FluxFormTelescopes) {
    std::mt19937_64 gen(11);
    for (const auto& A : small_operators()) {
        for (int trial = 0; trial < 10; ++trial) {
            const auto v = random_vector(A.size(), gen);
            const auto y = A.apply(v);
            double total = 0.0, scale = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) {
                total += y[i] - A.shift() * v[i];
                scale += std::abs(y[i]);
            }
            EXPECT_LT(std::abs(total), 1e-13 * scale);
        }
    }
}

TEST(SolveSpd, OnesFromUnitRowSums) {
    const SpdMatrix A = assemble_heat_periodic(3, 1.0, 1.0);
    const auto r = solve_spd(A, std::vector<double>{1.0, 1.0, 1.0});
    for (double v : r.x) EXPECT_NEAR(v, 1.0, 1e-14);
    EXPECT_TRUE(r.report.converged);
}

TEST(SolveSpd, ZeroRightHandSide) {
    const SpdMatrix A = assemble_diffusion_2d(build_grid_2d(1.0, 4, 4), 0.1);
    const auto r = solve_spd(A, std::vector<double>(16, 0.0));
    for (double v : r.x) EXPECT_EQ(v, 0.0);
}

TEST(SolveSpd, MatchesGaussianElimination) {
    std::mt19937_64 gen(2024);
    for (const auto& A : small_operators()) {
        if (A.size() > 20) continue;
        for (int trial = 0; trial < 5; ++trial) {
            const auto b = random_vector(A.size(), gen);
            const auto x = solve_spd(A, b).x;
            const auto ref = oracle::solve(densify(A), b);
            EXPECT_LT(max_abs_diff(x, ref), 1e-10);
        }
    }
}

TEST(SolveSpd, MultiplyBackReproducesRhs) {
    std::mt19937_64 gen(5);
    const SpdMatrix A = assemble_screened_2d(build_grid_2d(1.0, 16, 24), 0.1);
    const auto b = random_vector(A.size(), gen);
    const auto r = solve_spd(A, b, 1e-12);
    const auto Ax = A.apply(r.x);
    std::vector<double> res(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) res[i] = Ax[i] - b[i];
    EXPECT_LE(norm2(res) / norm2(b), 1e-12);
    EXPECT_NEAR(r.report.relative_residual, norm2(res) / norm2(b), 1e-13);
}

TEST(SolveSpd, Deterministic) {
    std::mt19937_64 gen(9);
    const SpdMatrix A = assemble_diffusion_2d(build_grid_2d(1.0, 12, 12), 0.01);
    const auto b = random_vector(A.size(), gen);
    EXPECT_EQ(solve_spd(A, b).x, solve_spd(A, b).x);
}

TEST(SolveSpd, ReportsNonConvergence) {
    std::mt19937_64 gen(1);
    const SpdMatrix A = assemble_screened_2d(build_grid_2d(1.0, 16, 16), 0.01);
    const auto b = random_vector(A.size(), gen);
    try {
        solve_spd(A, b, 1e-14, {}, 2);
        FAIL() << "expected SolverFailure";
    } catch (const SolverFailure& e) {
        EXPECT_FALSE(e.report().converged);
        EXPECT_EQ(e.report().iterations, 2u);
    }
}

TEST(TridiagonalSolver, MatchesGaussianElimination) {
    std::mt19937_64 gen(17);
    for (std::size_t n = 3; n <= 12; ++n) {
        for (bool periodic : {true, false}) {
            const double dx = 0.7 / static_cast<double>(n), dt = 1e-3 * static_cast<double>(n);
            const SpdMatrix A = periodic ? assemble_heat_periodic(n, dx, dt, 1.3) : assemble_heat_bounded(n, dx, dt, 1.3);
            const TridiagonalSolver solver(A);
            EXPECT_EQ(solver.periodic(), periodic);
            const auto b = random_vector(n, gen);
            EXPECT_LT(max_abs_diff(solver.solve(b).x, oracle::solve(densify(A), b)), 1e-12);
            EXPECT_LT(max_abs_diff(solver.apply(b), A.apply(b)), 1e-14);
        }
    }
}

TEST(TridiagonalSolver, ShiftUpdateEqualsFreshAssembly) {
    std::mt19937_64 gen(3);
    const std::size_t n = 50;
    const double dx = 0.02;
    TridiagonalSolver solver(assemble_heat_periodic(n, dx, 1e-3));
    solver.set_shift(dx * dx / 4e-3);
    const TridiagonalSolver fresh(assemble_heat_periodic(n, dx, 4e-3));
    const auto b = random_vector(n, gen);
    EXPECT_LT(max_abs_diff(solver.solve(b).x, fresh.solve(b).x), 1e-12);
}

TEST(TridiagonalSolver, ConservesSum) {
    std::mt19937_64 gen(8);
    const std::size_t n = 400;
    const double dx = 10.0 / static_cast<double>(n), dt = 0.01;
    const SpdMatrix A = assemble_heat_bounded(n, dx, dt);
    const auto b = random_vector(n, gen, 0.0, 3.0);
    const auto x = TridiagonalSolver(A).solve(b).x;
    double sb = 0.0, sx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sb += b[i];
        sx += x[i];
    }
    EXPECT_NEAR(sx * A.shift(), sb, 1e-12 * sb);
}

TEST(TridiagonalSolver, SmallShiftLargeCycle) {
    // dx^2/dt = 6e-5: ||r||/||b|| sits above 1e-12 from rounding alone
    const std::size_t n = 4096;
    const double dx = 1.0 / static_cast<double>(n);
    const SpdMatrix A = assemble_heat_periodic(n, dx, 1e-3);
    std::mt19937_64 gen(29);
    const auto b = random_vector(n, gen, 0.0, 1.0);
    const auto res = TridiagonalSolver(A).solve(b);
    EXPECT_LE(res.report.backward_error, 1e-14);
    EXPECT_LE(res.report.relative_residual, 1e-9);
    const auto cg = solve_spd(A, b, 1e-10, {}, 100000);
    EXPECT_LT(max_abs_diff(res.x, cg.x), 1e-8 * norm2(res.x));
}

TEST(TridiagonalSolver, RejectsWideBand) {
    const SpdMatrix A = assemble_diffusion_2d(build_grid_2d(1.0, 4, 4), 0.1);
    EXPECT_THROW(TridiagonalSolver{A}, std::invalid_argument);
}

TEST(SeparableSolver2D, OperatorsMatchAssembly) {
    std::mt19937_64 gen(21);
    for (auto [nx, ny] : {std::pair<std::size_t, std::size_t>{3, 3}, {4, 6}, {7, 5}, {16, 32}}) {
        const Grid2D g = build_grid_2d(1.3, nx, ny);
        const auto x = random_vector(g.cells(), gen);
        const auto diff = SeparableSolver2D::diffusion(g, 0.02, 0.8);
        EXPECT_LT(max_abs_diff(diff.apply(x), assemble_diffusion_2d(g, 0.02, 0.8).apply(x)), 1e-12);
        const auto scr = SeparableSolver2D::screened(g, 0.1);
        EXPECT_LT(max_abs_diff(scr.apply(x), assemble_screened_2d(g, 0.1).apply(x)), 1e-12);
    }
}

TEST(SeparableSolver2D, MatchesDenseElimination) {
    std::mt19937_64 gen(22);
    for (auto [nx, ny] : {std::pair<std::size_t, std::size_t>{3, 3}, {4, 4}, {3, 6}, {5, 7}}) {
        const Grid2D g = build_grid_2d(1.0, nx, ny);
        const auto b = random_vector(g.cells(), gen);
        const SpdMatrix A = assemble_screened_2d(g, 0.1);
        const auto x = SeparableSolver2D::screened(g, 0.1).solve(b).x;
        EXPECT_LT(max_abs_diff(x, oracle::solve(densify(A), b)), 1e-10) << nx << "x" << ny;
    }
}

TEST(SeparableSolver2D, AgreesWithConjugateGradients) {
    std::mt19937_64 gen(23);
    const Grid2D g = build_grid_2d(1.0, 32, 64);
    const auto b = random_vector(g.cells(), gen);
    SeparableSolver2D direct = SeparableSolver2D::diffusion(g, 1e-3);
    direct.set_shift(g.dx() * g.dx() / 5e-3);
    const auto x = direct.solve(b).x;
    const auto y = solve_spd(assemble_diffusion_2d(g, 5e-3), b, 1e-13).x;
    EXPECT_LT(max_abs_diff(x, y), 1e-10);
}

TEST(WriteCoordinate, OneBasedTriplets) {
    const SpdMatrix A = assemble_heat_periodic(3, 1.0, 1.0);
    std::ostringstream os;
    write_coordinate(os, A.matrix(), "heat");
    const std::string text = os.str();
    EXPECT_NE(text.find("# heat n=3 nnz=9"), std::string::npos);
    EXPECT_NE(text.find("\n1 1 3\n"), std::string::npos);
    EXPECT_NE(text.find("\n3 1 -1\n"), std::string::npos);
}
