#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include "cellpol/config.hpp"
#include "cellpol/errors.hpp"
#include "cellpol/runner.hpp"

using namespace cellpol;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("cellpol-test-" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunConfig small_2d(double M) {
    RunConfig c;
    c.model = Model::Exchange2D;
    c.params.M = M;
    c.nx = 8;
    c.ny = 16;
    c.T_end = 0.5;
    c.snapshot_every = 0.1;
    return c;
}

std::vector<double> rotate_rows(const std::vector<double>& v, std::size_t ny, std::size_t m) {
    std::vector<double> out(v.size());
    for (std::size_t row = 0; row < v.size() / ny; ++row) {
        for (std::size_t k = 0; k < ny; ++k) out[row * ny + (k + m) % ny] = v[row * ny + k];
    }
    return out;
}

}  // namespace

TEST(InitialState, MassExactForEveryModel) {
    for (Model m : {Model::Periodic1D, Model::Simplified1D, Model::Exchange1D, Model::Exchange2D, Model::Reduced}) {
        RunConfig c;
        c.model = m;
        c.params.M = 2.75;
        const RunResult r = run_model([&] { RunConfig z = c; z.T_end = 0.0; return z; }());
        EXPECT_NEAR(r.verdict.conservation_defect, 0.0, 1e-15) << to_string(m);
        EXPECT_FALSE(initial_state(c).rho.empty() && initial_state(c).mu.empty());
    }
}

TEST(RunModel, ZeroEndTimeIsUndecided) {
    RunConfig c = small_2d(1.0);
    c.T_end = 0.0;
    const RunResult r = run_model(c);
    EXPECT_EQ(r.verdict.cls, VerdictClass::Undecided);
    EXPECT_EQ(r.steps, 0u);
    EXPECT_EQ(r.record.history.size(), 1u);
    EXPECT_EQ(r.verdict.final_time, 0.0);
    EXPECT_NE(format_summary(r).find("verdict = undecided"), std::string::npos);
}

TEST(RunModel, StopsExactlyAtEndTime) {
    const RunResult r = run_model(small_2d(1.0));
    EXPECT_DOUBLE_EQ(r.final_state.t, 0.5);
    EXPECT_EQ(r.stop_reason, "t_end");
    EXPECT_LE(r.verdict.conservation_defect, 1e-12);
    EXPECT_GE(r.record.history.size(), 6u);
}

TEST(RunModel, RelativeGuardFires) {
    RunConfig c;
    c.model = Model::Simplified1D;
    c.nx = 400;
    c.params.M = 3.0;
    c.T_end = 5.0;
    c.blowup_guard = {10.0, true};
    const RunResult r = run_model(c);
    EXPECT_EQ(r.verdict.cls, VerdictClass::BlowUpSuspected);
    EXPECT_EQ(r.stop_reason, "guard");
    EXPECT_GE(r.verdict.peak_density, 10.0 * r.initial_peak);
    EXPECT_LT(r.final_state.t, 5.0);
}

TEST(RunModel, DtFloorFires) {
    RunConfig c;
    c.model = Model::Simplified1D;
    c.nx = 400;
    c.params.M = 3.0;
    c.T_end = 5.0;
    c.dt_floor = 5e-4;
    const RunResult r = run_model(c);
    EXPECT_EQ(r.stop_reason, "dt-floor");
    EXPECT_TRUE(r.verdict.dt_floor_hit);
    EXPECT_EQ(r.verdict.cls, VerdictClass::BlowUpSuspected);
}

TEST(RunModel, BitIdenticalOutputs) {
    const RunConfig c = small_2d(5.0);
    const fs::path a = scratch("det-a"), b = scratch("det-b");
    write_run_outputs(run_model(c), a);
    write_run_outputs(run_model(c), b);
    for (const char* f : {"config.txt", "summary.txt", "bulk.dat", "boundary.dat"}) {
        ASSERT_TRUE(fs::exists(a / f)) << f;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
}

TEST(RunModel, OutputsEmbedConfigAndProvenance) {
    RunConfig c = small_2d(2.0);
    c.seed = 77;
    const fs::path dir = scratch("prov");
    write_run_outputs(run_model(c), dir);
    for (const char* f : {"bulk.dat", "boundary.dat"}) {
        const std::string text = slurp(dir / f);
        EXPECT_NE(text.find("# M = 2\n"), std::string::npos) << f;
        EXPECT_NE(text.find("# rng_algorithm = mt19937_64/53-bit"), std::string::npos) << f;
        EXPECT_NE(text.find("# rng_seed = 77"), std::string::npos) << f;
        EXPECT_NE(text.find("# columns:"), std::string::npos) << f;
    }
    EXPECT_NE(slurp(dir / "bulk.dat").find("# columns: 1:t 2:j 3:k 4:x 5:y 6:rho"), std::string::npos);
    const RunConfig back = parse_config(slurp(dir / "config.txt"));
    EXPECT_EQ(format_config(back), format_config(c));
}

TEST(RunModel, RotationEquivariance) {
    const RunConfig c = small_2d(8.0);
    const SimState start = initial_state(c);
    const std::size_t m = 3;
    SimState rotated = start;
    rotated.rho = rotate_rows(start.rho, c.ny, m);
    rotated.mu = rotate_rows(start.mu, c.ny, m);
    const RunResult a = run_model(c, start);
    const RunResult b = run_model(c, rotated);
    ASSERT_EQ(a.steps, b.steps);
    const auto ra = rotate_rows(a.final_state.rho, c.ny, m);
    for (std::size_t i = 0; i < ra.size(); ++i) EXPECT_NEAR(ra[i], b.final_state.rho[i], 1e-12);
    EXPECT_EQ(a.verdict.cls, b.verdict.cls);
    EXPECT_NEAR(a.verdict.polarisation_index, b.verdict.polarisation_index, 1e-12);
}

TEST(Sweep, EmptyAndInputOrder) {
    RunConfig c;
    c.model = Model::Exchange1D;
    c.T_end = 1.0;
    EXPECT_TRUE(sweep(c, "M", {}).empty());
    const auto rows = sweep(c, "M", {3.0, 1.0, 2.0});
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].value, 3.0);
    EXPECT_EQ(rows[2].value, 2.0);
    for (const auto& r : rows) EXPECT_TRUE(r.verdict.has_value());
}

TEST(Sweep, FailuresStayInTheirRow) {
    RunConfig c;
    c.model = Model::Exchange1D;
    c.T_end = 0.5;
    const fs::path dir = scratch("sweep");
    const auto rows = sweep(c, "D", {1.0, -1.0, 2.0}, dir);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_TRUE(rows[0].verdict.has_value());
    EXPECT_FALSE(rows[1].verdict.has_value());
    EXPECT_FALSE(rows[1].error.empty());
    EXPECT_TRUE(rows[2].verdict.has_value());
    EXPECT_TRUE(fs::exists(dir / "sweep.tsv"));
    EXPECT_THROW(sweep(c, "N_x", {1.0}), ConfigError);
    EXPECT_TRUE(is_sweepable("alpha"));
    EXPECT_FALSE(is_sweepable("dt"));
}

TEST(BisectMass, CoarseHalfLine) {
    RunConfig c;
    c.model = Model::Simplified1D;
    c.nx = 400;
    c.blowup_guard = {10.0, true};
    c.steady_tol = 1e-2;
    const auto report = bisect_mass(c, 0.5, 2.0, 0.1, 8, true);
    EXPECT_TRUE(report.estimate.converged);
    EXPECT_GT(report.estimate.mass, 0.8);
    EXPECT_LT(report.estimate.mass, 1.3);
    ASSERT_EQ(report.robustness.size(), 3u);
    EXPECT_EQ(report.robustness[0].seed, c.seed);
    EXPECT_NE(format_bisect(report).find("M_star = "), std::string::npos);
}

#ifdef CELLPOL_CLI_PATH
namespace {

int cli(const std::string& args, const fs::path& root) {
    const std::string cmd = "CELLPOL_OUTPUT_ROOT='" + root.string() + "' '" CELLPOL_CLI_PATH "' " + args + " > '" +
                            (root / "stdout.txt").string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, ExitCodesFollowTheVerdict) {
    const fs::path root = scratch("cli");
    EXPECT_EQ(cli("run --model exchange1d --M 5 --no-files", root), 0);
    EXPECT_EQ(cli("run --model simplified1d --N_x 400 --M 3 --blowup_guard 10x --T_end 5 --no-files", root), 3);
    EXPECT_EQ(cli("run --model exchange2d --T_end 0 --N_x 4 --N_y 4 --no-files", root), 4);
    EXPECT_EQ(cli("run --model exchange2d --M -1", root), 1);
    EXPECT_NE(slurp(root / "stdout.txt").find("M > 0"), std::string::npos);
}

TEST(Cli, FlagsOverrideConfigFile) {
    const fs::path root = scratch("cli-config");
    {
        std::ofstream cfg(root / "run.cfg");
        cfg << "model = exchange1d\nM = 5\nT_end = 1\n";
    }
    EXPECT_EQ(cli("run --config '" + (root / "run.cfg").string() + "' --M 4 --name r1", root), 4);
    const std::string summary = slurp(root / "r1" / "config.txt");
    EXPECT_NE(summary.find("M = 4\n"), std::string::npos);
    EXPECT_TRUE(fs::exists(root / "r1" / "bulk.dat"));
}

TEST(Cli, ConvergeAndDumpMatrix) {
    const fs::path root = scratch("cli-misc");
    EXPECT_EQ(cli("converge --case zero --resolutions 8,16,32", root), 0);
    EXPECT_NE(slurp(root / "stdout.txt").find("order = exact"), std::string::npos);
    EXPECT_EQ(cli("dump-matrix --which heat-1d --N_x 3 --dt 1 --dt_max 1", root), 0);
    EXPECT_NE(slurp(root / "stdout.txt").find("nnz=9"), std::string::npos);
    EXPECT_EQ(cli("sweep --model exchange1d --T_end 0.5 --param M --values 1,2 --name s", root), 0);
    EXPECT_TRUE(fs::exists(root / "s" / "sweep.tsv"));
}
#endif
