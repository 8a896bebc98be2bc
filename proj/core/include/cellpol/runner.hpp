#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cellpol/config.hpp"
#include "cellpol/diagnostics.hpp"

namespace cellpol {

/// Environment variable selecting the directory that receives run outputs.
inline constexpr const char* kOutputRootEnv = "CELLPOL_OUTPUT_ROOT";

std::filesystem::path output_root();

struct RunResult {
    RunConfig config;
    RunVerdict verdict;
    RunRecord record;
    SimState final_state;
    std::size_t steps{0};
    double initial_peak{0.0};
    double initial_cfl_dt{0.0};  ///< kCflSafety / rate of the initial state (+inf at rest)
    double min_dt{0.0};          ///< smallest accepted step, the final clipped step excluded
    double max_dt{0.0};
    std::string stop_reason;     ///< t_end | guard | dt-floor
};

/// Initial state of the configured model (mass exactly M).
SimState initial_state(const RunConfig& config);

/**
 * Advances the configured model from its initial state (or from `start`) to
 * T_end or to the first sentinel (peak >= guard, dt < dt_floor), with the
 * adaptive step: grow by 10% up to dt_max, halve while dt * rate > kCflSafety.
 */
RunResult run_model(const RunConfig& config);
RunResult run_model(const RunConfig& config, const SimState& start);

/// Writes config.txt, summary.txt, bulk.dat and (when present) boundary.dat into dir.
void write_run_outputs(const RunResult& result, const std::filesystem::path& dir);

/// Key = value summary of a finished run, including RNG provenance.
std::string format_summary(const RunResult& result);

struct SweepRow {
    double value{0.0};
    std::optional<RunVerdict> verdict;
    std::string error;
};

/// Parameters that sweep accepts: D, chi, S, k_on, k_off, alpha, r, M.
bool is_sweepable(const std::string& parameter);

/**
 * One run per value, rows in input order. A failing run is recorded in its row.
 * When dir is given each run writes into dir/<row index> and sweep.tsv is written
 * once all rows are done.
 */
std::vector<SweepRow> sweep(const RunConfig& base, const std::string& parameter,
                            const std::vector<double>& values,
                            const std::optional<std::filesystem::path>& dir = std::nullopt);

std::string format_sweep(const std::string& parameter, const std::vector<SweepRow>& rows);

struct SeedCheck {
    std::uint64_t seed{0};
    VerdictClass at_lo{VerdictClass::Undecided};
    VerdictClass at_hi{VerdictClass::Undecided};
};

struct BisectReport {
    CriticalMassEstimate estimate;
    std::vector<SeedCheck> robustness;  ///< campaign seed plus two more, at the final bracket
};

/// Bisection on M with everything else fixed. Robustness seeds do not gate the estimate.
BisectReport bisect_mass(const RunConfig& base, double lo, double hi, double tol, std::size_t budget,
                         bool robustness = true);

std::string format_bisect(const BisectReport& report);

}  // namespace cellpol
