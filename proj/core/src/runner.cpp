#include "cellpol/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cellpol/errors.hpp"
#include "cellpol/heuristic.hpp"
#include "cellpol/scheme1d.hpp"
#include "cellpol/scheme2d.hpp"

namespace cellpol {

std::filesystem::path output_root() {
    const char* env = std::getenv(kOutputRootEnv);
    return env && *env ? std::filesystem::path(env) : std::filesystem::path("cellpol-output");
}

namespace {

double max_of(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
}

double sum_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

class Driver {
public:
    virtual ~Driver() = default;
    virtual double rate(const SimState& state) = 0;
    virtual SimState advance(const SimState& state, double dt) = 0;
    virtual double mass(const SimState& state) const = 0;
    virtual double peak(const SimState& state) const { return max_of(state.rho); }
    virtual Snapshot snapshot(const SimState& state) const { return {state.t, state.rho, state.mu, {}}; }
    virtual IndexSource index_source() const = 0;
};

class Periodic1DDriver final : public Driver {
public:
    explicit Periodic1DDriver(const RunConfig& c)
        : grid_(Grid1D::periodic(c.nx, 1.0)),
          stepper_(grid_, c.params.D),
          u_(FaceVelocities1D::constant_periodic(c.nx, c.params.chi)) {}

    double rate(const SimState&) override { return periodic_rate(u_, grid_.dx()); }
    SimState advance(const SimState& s, double dt) override {
        SimState next = s;
        next.rho = stepper_.step(s.rho, u_, dt);
        return next;
    }
    double mass(const SimState& s) const override { return total_mass(s, grid_); }
    IndexSource index_source() const override { return IndexSource::Rho; }

    const Grid1D& grid() const { return grid_; }

private:
    Grid1D grid_;
    PeriodicStepper stepper_;
    FaceVelocities1D u_;
};

class HalfLineDriver final : public Driver {
public:
    HalfLineDriver(const RunConfig& c, bool exchange)
        : grid_(Grid1D::half_line(c.nx, c.L)), stepper_(grid_, c.params), exchange_(exchange) {}

    double rate(const SimState& s) override {
        return exchange_ ? stepper_.exchange_rate(s) : stepper_.simplified_rate(s.rho);
    }
    SimState advance(const SimState& s, double dt) override {
        if (exchange_) return stepper_.step_exchange(s, dt);
        SimState next = s;
        next.rho = stepper_.step_simplified(s.rho, dt);
        return next;
    }
    double mass(const SimState& s) const override { return total_mass(s, grid_); }
    IndexSource index_source() const override { return IndexSource::None; }

private:
    Grid1D grid_;
    HalfLineStepper stepper_;
    bool exchange_;
};

class Exchange2DDriver final : public Driver {
public:
    explicit Exchange2DDriver(const RunConfig& c)
        : grid_(build_grid_2d(c.params.r, c.nx, c.ny)), stepper_(grid_, c.params, c.sign) {}

    double rate(const SimState& s) override {
        prepared_ = stepper_.prepare(s);
        prepared_step_ = s.step;
        return prepared_->rate;
    }
    SimState advance(const SimState& s, double dt) override {
        if (!prepared_ || prepared_step_ != s.step) rate(s);
        SimState next = stepper_.advance(s, *prepared_, dt);
        prepared_.reset();
        return next;
    }
    double mass(const SimState& s) const override { return total_mass(s, grid_); }
    double peak(const SimState& s) const override { return std::max(max_of(s.rho), max_of(s.mu)); }
    Snapshot snapshot(const SimState& s) const override {
        Snapshot snap{s.t, s.rho, s.mu, {}};
        const std::size_t ny = grid_.ny();
        // The stored c lags one step behind mu; recompute it from the current mu.
        const auto c = stepper_.solve_potential(s.mu).c;
        snap.c_wall.assign(c.end() - static_cast<std::ptrdiff_t>(ny), c.end());
        return snap;
    }
    IndexSource index_source() const override { return IndexSource::Mu; }

private:
    Grid2D grid_;
    CoupledStepper stepper_;
    std::optional<CoupledStepper::Prepared> prepared_;
    std::uint64_t prepared_step_{0};
};

class ReducedDriver final : public Driver {
public:
    explicit ReducedDriver(const RunConfig& c)
        : grid_(reduced_grid(c.ny, c.params.r)), stepper_(grid_, c.params) {}

    double rate(const SimState& s) override { return stepper_.rate(s.mu); }
    SimState advance(const SimState& s, double dt) override {
        ReducedState next = stepper_.step({s.mu, s.t}, dt);
        SimState out = s;
        out.mu = std::move(next.nu);
        return out;
    }
    double mass(const SimState& s) const override { return sum_of(s.mu) * grid_.dx(); }
    double peak(const SimState& s) const override { return max_of(s.mu); }
    IndexSource index_source() const override { return IndexSource::Mu; }

private:
    Grid1D grid_;
    ReducedStepper stepper_;
};

std::unique_ptr<Driver> make_driver(const RunConfig& c) {
    switch (c.model) {
        case Model::Periodic1D: return std::make_unique<Periodic1DDriver>(c);
        case Model::Simplified1D: return std::make_unique<HalfLineDriver>(c, false);
        case Model::Exchange1D: return std::make_unique<HalfLineDriver>(c, true);
        case Model::Exchange2D: return std::make_unique<Exchange2DDriver>(c);
        case Model::Reduced: return std::make_unique<ReducedDriver>(c);
    }
    throw std::logic_error("unhandled model");
}

}  // namespace

SimState initial_state(const RunConfig& c) {
    c.validate();
    const Params& p = c.params;
    SimState s;
    switch (c.model) {
        case Model::Periodic1D: {
            const Grid1D grid = Grid1D::periodic(c.nx, 1.0);
            Rng rng(c.seed);
            s.rho.resize(c.nx);
            for (double& v : s.rho) v = 1.0 + c.eps * rng.symmetric();
            const double scale = p.M / (sum_of(s.rho) * grid.dx());
            for (double& v : s.rho) v *= scale;
            return s;
        }
        case Model::Simplified1D:
            s.rho = exponential_profile(Grid1D::half_line(c.nx, c.L), p.M);
            return s;
        case Model::Exchange1D:
            return seeded_random_initial(Grid1D::half_line(c.nx, c.L), p, c.eps, c.seed);
        case Model::Exchange2D:
            return seeded_random_initial(build_grid_2d(p.r, c.nx, c.ny), p, c.eps, c.seed);
        case Model::Reduced: {
            const Grid1D circle = reduced_grid(c.ny, p.r);
            s.mu.resize(c.ny);
            for (std::size_t k = 0; k < c.ny; ++k) {
                s.mu[k] = 1.0 + c.eps * std::cos(circle.center(k) / p.r);
            }
            const double scale = p.M / (sum_of(s.mu) * circle.dx());
            for (double& v : s.mu) v *= scale;
            return s;
        }
    }
    throw std::logic_error("unhandled model");
}

RunResult run_model(const RunConfig& config) { return run_model(config, initial_state(config)); }

RunResult run_model(const RunConfig& config, const SimState& start) {
    config.validate();
    auto driver = make_driver(config);

    RunResult res;
    res.config = config;
    res.record.index_source = driver->index_source();

    SimState state = start;
    const double mass0 = driver->mass(state);
    res.initial_peak = driver->peak(state);
    const Thresholds thresholds = config.thresholds(res.initial_peak);
    double peak = res.initial_peak;
    double defect = 0.0;

    res.record.history.push_back(driver->snapshot(state));
    double next_snapshot = state.t + config.snapshot_every;
    const double t_end = config.T_end;
    const double t_tol = 1e-12 * std::max(1.0, t_end);

    res.min_dt = std::numeric_limits<double>::infinity();
    res.max_dt = 0.0;
    res.stop_reason = "t_end";
    double dt_prev = 0.0;
    bool first = true;

    while (state.t < t_end - t_tol) {
        const double rate = driver->rate(state);
        if (first) res.initial_cfl_dt = rate > 0.0 ? kCflSafety / rate : std::numeric_limits<double>::infinity();

        double dt = first ? config.dt : std::min(1.1 * dt_prev, config.dt_max);
        while (dt * rate > kCflSafety) dt *= 0.5;
        if (dt < config.dt_floor) {
            res.record.dt_floor_hit = true;
            res.stop_reason = "dt-floor";
            break;
        }
        dt_prev = dt;
        first = false;
        const bool clipped = state.t + dt >= t_end - t_tol;
        if (clipped) {
            dt = t_end - state.t;
        } else {
            res.min_dt = std::min(res.min_dt, dt);
            res.max_dt = std::max(res.max_dt, dt);
        }

        const double t_next = clipped ? t_end : state.t + dt;
        state = driver->advance(state, dt);
        state.t = t_next;
        ++res.steps;

        const double m = driver->mass(state);
        defect = std::max(defect, mass0 > 0.0 ? std::abs(m - mass0) / mass0 : std::abs(m));
        const double p = driver->peak(state);
        if (!std::isfinite(p)) throw NonFiniteState("run_model");
        peak = std::max(peak, p);

        const bool by_time = state.t >= next_snapshot - t_tol;
        const bool by_steps = config.snapshot_steps > 0 && res.steps % config.snapshot_steps == 0;
        const bool guard = peak >= thresholds.blowup_guard;
        if (by_time || by_steps || guard || clipped) {
            res.record.history.push_back(driver->snapshot(state));
            while (next_snapshot <= state.t + t_tol) next_snapshot += config.snapshot_every;
        }
        if (guard) {
            res.stop_reason = "guard";
            break;
        }
    }
    if (res.record.history.back().t != state.t) res.record.history.push_back(driver->snapshot(state));
    if (!std::isfinite(res.min_dt)) res.min_dt = 0.0;

    res.record.peak_density = peak;
    res.record.conservation_defect = defect;
    res.verdict = classify_run(res.record, thresholds);
    res.final_state = std::move(state);
    return res;
}

std::string format_summary(const RunResult& r) {
    std::ostringstream out;
    const auto f = [](double v) { return format_double(v); };
    out << "verdict = " << to_string(r.verdict.cls) << "\n"
        << "exit_code = " << exit_code(r.verdict.cls) << "\n"
        << "polarisation_index = " << f(r.verdict.polarisation_index) << "\n"
        << "steady = " << (r.verdict.steady ? "true" : "false") << "\n"
        << "final_time = " << f(r.verdict.final_time) << "\n"
        << "peak_density = " << f(r.verdict.peak_density) << "\n"
        << "initial_peak = " << f(r.initial_peak) << "\n"
        << "conservation_defect = " << f(r.verdict.conservation_defect) << "\n"
        << "dt_floor_hit = " << (r.verdict.dt_floor_hit ? "true" : "false") << "\n"
        << "stop_reason = " << r.stop_reason << "\n"
        << "steps = " << r.steps << "\n"
        << "snapshots = " << r.record.history.size() << "\n"
        << "initial_cfl_dt = " << f(r.initial_cfl_dt) << "\n"
        << "min_dt = " << f(r.min_dt) << "\n"
        << "max_dt = " << f(r.max_dt) << "\n"
        << "rng_algorithm = " << Rng::kAlgorithm << "\n"
        << "rng_seed = " << r.config.seed << "\n";
    return out.str();
}

namespace {

void write_header(std::ostream& os, const RunConfig& config, const std::string& columns) {
    os << "# cellpol output\n";
    for (const auto& [k, v] : resolved_entries(config)) os << "# " << k << " = " << v << "\n";
    os << "# rng_algorithm = " << Rng::kAlgorithm << "\n";
    os << "# rng_seed = " << config.seed << "\n";
    os << "# columns: " << columns << "\n";
    os << "# gnuplot: blocks separated by two blank lines, select a frame with 'index n'\n";
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return os;
}

}  // namespace

void write_run_outputs(const RunResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const RunConfig& c = r.config;
    const auto f = [](double v) { return format_double(v); };

    {
        auto os = open_output(dir / "config.txt");
        os << format_config(c);
    }
    {
        auto os = open_output(dir / "summary.txt");
        write_header(os, c, "key = value");
        os << format_summary(r);
    }

    const auto& history = r.record.history;
    if (c.model == Model::Exchange2D) {
        const Grid2D grid = build_grid_2d(c.params.r, c.nx, c.ny);
        auto bulk = open_output(dir / "bulk.dat");
        write_header(bulk, c, "1:t 2:j 3:k 4:x 5:y 6:rho");
        auto wall = open_output(dir / "boundary.dat");
        write_header(wall, c, "1:t 2:k 3:y 4:mu 5:c_wall");
        for (std::size_t s = 0; s < history.size(); ++s) {
            const Snapshot& snap = history[s];
            if (s) bulk << "\n\n", wall << "\n\n";
            for (std::size_t j = 0; j < grid.nx(); ++j) {
                for (std::size_t k = 0; k < grid.ny(); ++k) {
                    bulk << f(snap.t) << ' ' << j + 1 << ' ' << k + 1 << ' ' << f(grid.x_center(j)) << ' '
                         << f(grid.y_node(k)) << ' ' << f(snap.rho[grid.index(j, k)]) << '\n';
                }
            }
            for (std::size_t k = 0; k < grid.ny(); ++k) {
                wall << f(snap.t) << ' ' << k + 1 << ' ' << f(grid.y_node(k)) << ' ' << f(snap.mu[k]) << ' '
                     << f(snap.c_wall.empty() ? 0.0 : snap.c_wall[k]) << '\n';
            }
        }
        return;
    }
    if (c.model == Model::Reduced) {
        const Grid1D circle = reduced_grid(c.ny, c.params.r);
        auto wall = open_output(dir / "boundary.dat");
        write_header(wall, c, "1:t 2:k 3:y 4:nu");
        for (std::size_t s = 0; s < history.size(); ++s) {
            if (s) wall << "\n\n";
            for (std::size_t k = 0; k < c.ny; ++k) {
                wall << f(history[s].t) << ' ' << k + 1 << ' ' << f(circle.center(k)) << ' '
                     << f(history[s].mu[k]) << '\n';
            }
        }
        return;
    }

    const Grid1D grid = c.model == Model::Periodic1D ? Grid1D::periodic(c.nx, 1.0) : Grid1D::half_line(c.nx, c.L);
    auto bulk = open_output(dir / "bulk.dat");
    write_header(bulk, c, "1:t 2:j 3:x 4:rho");
    for (std::size_t s = 0; s < history.size(); ++s) {
        if (s) bulk << "\n\n";
        for (std::size_t j = 0; j < grid.nx(); ++j) {
            bulk << f(history[s].t) << ' ' << j + 1 << ' ' << f(grid.center(j)) << ' ' << f(history[s].rho[j])
                 << '\n';
        }
    }
    if (c.model == Model::Exchange1D) {
        auto wall = open_output(dir / "boundary.dat");
        write_header(wall, c, "1:t 2:mu");
        for (const Snapshot& snap : history) wall << f(snap.t) << ' ' << f(snap.mu.front()) << '\n';
    }
}

bool is_sweepable(const std::string& parameter) {
    static const std::vector<std::string> names{"D", "chi", "S", "k_on", "k_off", "alpha", "r", "M"};
    return std::find(names.begin(), names.end(), parameter) != names.end();
}

std::vector<SweepRow> sweep(const RunConfig& base, const std::string& parameter,
                            const std::vector<double>& values,
                            const std::optional<std::filesystem::path>& dir) {
    if (!is_sweepable(parameter)) {
        throw ConfigError(parameter, 0, "not a sweepable parameter (D, chi, S, k_on, k_off, alpha, r, M)");
    }
    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        SweepRow row;
        row.value = values[i];
        try {
            RunConfig c = base;
            set_config_value(c, parameter, format_double(values[i]));
            c.validate();
            RunResult r = run_model(c);
            if (dir) write_run_outputs(r, *dir / std::to_string(i));
            row.verdict = r.verdict;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    if (dir) {
        std::filesystem::create_directories(*dir);
        auto os = open_output(*dir / "sweep.tsv");
        write_header(os, base, "1:" + parameter + " 2:verdict 3:index 4:peak 5:defect 6:error");
        os << format_sweep(parameter, rows);
    }
    return rows;
}

std::string format_sweep(const std::string& parameter, const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << parameter << "\tverdict\tindex\tpeak\tdefect\terror\n";
    for (const SweepRow& row : rows) {
        out << format_double(row.value) << '\t';
        if (row.verdict) {
            out << to_string(row.verdict->cls) << '\t' << format_double(row.verdict->polarisation_index) << '\t'
                << format_double(row.verdict->peak_density) << '\t'
                << format_double(row.verdict->conservation_defect) << "\t-\n";
        } else {
            out << "error\t-\t-\t-\t" << row.error << '\n';
        }
    }
    return out.str();
}

namespace {

VerdictClass classify_at(const RunConfig& base, double mass, std::uint64_t seed) {
    RunConfig c = base;
    c.params.M = mass;
    c.seed = seed;
    return run_model(c).verdict.cls;
}

}  // namespace

BisectReport bisect_mass(const RunConfig& base, double lo, double hi, double tol, std::size_t budget,
                         bool robustness) {
    base.validate();
    BisectReport report;
    report.estimate = estimate_critical_mass(
        [&](double m) { return classify_at(base, m, base.seed); }, lo, hi, tol, budget);
    if (robustness) {
        for (std::uint64_t s = base.seed; s < base.seed + 3; ++s) {
            report.robustness.push_back(
                {s, classify_at(base, report.estimate.lo, s), classify_at(base, report.estimate.hi, s)});
        }
    }
    return report;
}

std::string format_bisect(const BisectReport& report) {
    const auto& e = report.estimate;
    std::ostringstream out;
    out << "M_star = " << format_double(e.mass) << "\n"
        << "bracket_lo = " << format_double(e.lo) << "\n"
        << "bracket_hi = " << format_double(e.hi) << "\n"
        << "converged = " << (e.converged ? "true" : "false") << "\n"
        << "probes = " << e.audit.size() << "\n";
    for (const auto& p : e.audit) {
        out << "probe." << p.index << " = " << format_double(p.mass) << " " << to_string(p.verdict) << "\n";
    }
    for (const auto& s : report.robustness) {
        out << "seed." << s.seed << " = lo:" << to_string(s.at_lo) << " hi:" << to_string(s.at_hi) << "\n";
    }
    return out.str();
}

}  // namespace cellpol
