#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cellpol/core_types.hpp"
#include "cellpol/diagnostics.hpp"
#include "cellpol/scheme2d.hpp"

namespace cellpol {

enum class Model { Periodic1D, Simplified1D, Exchange1D, Exchange2D, Reduced };

std::string to_string(Model model);
Model parse_model(const std::string& text);

/// A threshold given either as an absolute value or as a multiple of a
/// reference fixed at t = 0 (written "10x").
struct ScaledValue {
    double value{0.0};
    bool relative{false};

    double resolve(double reference) const { return relative ? value * reference : value; }
    std::string str() const;
};

struct RunConfig {
    Model model{Model::Exchange2D};
    Params params;
    std::size_t nx{64};
    std::size_t ny{64};
    double L{10.0};  ///< half-line length (simplified1d, exchange1d)
    double dt{1e-3};
    double dt_max{1e-2};
    double dt_floor{1e-10};
    double T_end{50.0};
    std::uint64_t seed{1};
    double eps{0.1};
    SignConvention sign{SignConvention::Attractive};
    double snapshot_every{0.5};  ///< simulated time between snapshots
    std::size_t snapshot_steps{0};  ///< also snapshot every this many steps; 0 disables
    double pol_threshold{0.5};
    double homog_threshold{0.05};
    ScaledValue blowup_guard{1e6, false};  ///< relative guards scale with the initial peak density
    double steady_window{5.0};
    double steady_tol{1e-6};

    /// Throws ConfigError naming the first violated constraint.
    void validate() const;
    Thresholds thresholds(double initial_peak) const;
};

/// Keys accepted by parse_config and set_config_value, in documentation order.
const std::vector<std::string>& config_keys();

/**
 * Flat key = value document. '#' starts a comment, blank lines and [section]
 * headers are ignored. Unknown or repeated keys, malformed values and
 * violated constraints raise ConfigError with the key and line number.
 */
RunConfig parse_config(const std::string& text);

/// Applies one key = value assignment; line is used for error reporting only.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value, int line = 0);

/// Every key with its resolved value, one "key = value" per entry, in config_keys() order.
std::vector<std::pair<std::string, std::string>> resolved_entries(const RunConfig& config);
std::string format_config(const RunConfig& config);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace cellpol
