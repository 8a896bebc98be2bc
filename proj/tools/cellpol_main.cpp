// cellpol: run, sweep, bisect and verify the polarisation models.
//
// Exit codes: 0 homogeneous, 2 polarised, 3 blow-up suspected, 4 undecided, 1 error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cellpol/config.hpp"
#include "cellpol/diagnostics.hpp"
#include "cellpol/errors.hpp"
#include "cellpol/linalg.hpp"
#include "cellpol/runner.hpp"
#include "cellpol/scheme1d.hpp"

namespace {

using namespace cellpol;

struct ConfigSource {
    std::string file;
    std::map<std::string, std::string> overrides;
};

void add_config_options(CLI::App* app, ConfigSource& src) {
    app->add_option("--config", src.file, "key = value configuration file")->check(CLI::ExistingFile);
    for (const std::string& key : config_keys()) {
        app->add_option_function<std::string>(
            "--" + key, [&src, key](const std::string& v) { src.overrides[key] = v; },
            "override config key " + key);
    }
}

RunConfig resolve(const ConfigSource& src) {
    RunConfig config;
    if (!src.file.empty()) {
        std::ifstream in(src.file);
        if (!in) throw std::runtime_error("cannot read " + src.file);
        std::stringstream buf;
        buf << in.rdbuf();
        config = parse_config(buf.str());
    }
    for (const auto& [k, v] : src.overrides) set_config_value(config, k, v);
    config.validate();
    return config;
}

std::string default_name(const RunConfig& c) {
    return to_string(c.model) + "-M" + format_double(c.params.M) + "-seed" + std::to_string(c.seed);
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (tok.find_first_not_of(" \t") == std::string::npos) continue;
        out.push_back(std::stod(tok));
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cellpol: cell polarisation convection-diffusion simulator"};
    app.require_subcommand(1);
    app.footer("Outputs go to $" + std::string(kOutputRootEnv) + " (default ./cellpol-output).\n"
               "Exit codes: 0 homogeneous, 2 polarised, 3 blow-up suspected, 4 undecided, 1 error.");

    ConfigSource run_src, sweep_src, bisect_src, dump_src;
    std::string run_name;
    bool run_no_files = false;

    auto* run = app.add_subcommand("run", "run one simulation and classify it");
    add_config_options(run, run_src);
    run->add_option("--name", run_name, "run directory name under the output root");
    run->add_flag("--no-files", run_no_files, "print the summary only");

    std::string sweep_param, sweep_values, sweep_name;
    auto* sw = app.add_subcommand("sweep", "one run per value of a parameter");
    add_config_options(sw, sweep_src);
    sw->add_option("--param", sweep_param, "D, chi, S, k_on, k_off, alpha, r or M")->required();
    sw->add_option("--values", sweep_values, "comma separated values")->required();
    sw->add_option("--name", sweep_name, "sweep directory name");

    double lo = 0.0, hi = 0.0, tol = 0.05;
    std::size_t budget = 12;
    bool no_robustness = false;
    std::string bisect_name;
    auto* bi = app.add_subcommand("bisect", "estimate the critical mass by bisection on M");
    add_config_options(bi, bisect_src);
    bi->add_option("--lo", lo, "mass expected to be homogeneous")->required();
    bi->add_option("--hi", hi, "mass expected to polarise or blow up")->required();
    bi->add_option("--tol", tol, "target bracket width");
    bi->add_option("--budget", budget, "maximum number of interior probes");
    bi->add_flag("--no-robustness", no_robustness, "skip the three-seed report");
    bi->add_option("--name", bisect_name, "output directory name");

    std::string conv_case = "diffusion", conv_res = "32,64,128,256";
    double conv_velocity = 1.0;
    auto* cv = app.add_subcommand("converge", "observed order against an exact periodic solution");
    cv->add_option("--case", conv_case, "diffusion | advection | zero")
        ->check(CLI::IsMember({"diffusion", "advection", "zero"}));
    cv->add_option("--resolutions", conv_res, "comma separated cell counts (>= 3 values)");
    cv->add_option("--velocity", conv_velocity, "advection speed for the advection case");

    std::string which = "diffusion-2d", dump_out;
    auto* dm = app.add_subcommand("dump-matrix", "write an assembled matrix in 1-based coordinate form");
    add_config_options(dm, dump_src);
    dm->add_option("--which", which, "heat-1d | heat-1d-bounded | diffusion-2d | screened-2d | advection-1d")
        ->check(CLI::IsMember({"heat-1d", "heat-1d-bounded", "diffusion-2d", "screened-2d", "advection-1d"}));
    dm->add_option("--out", dump_out, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const RunConfig config = resolve(run_src);
            const RunResult result = run_model(config);
            if (!run_no_files) {
                const auto dir = output_root() / (run_name.empty() ? default_name(config) : run_name);
                write_run_outputs(result, dir);
                std::cout << "output = " << dir.string() << "\n";
            }
            std::cout << format_summary(result);
            return exit_code(result.verdict.cls);
        }
        if (*sw) {
            const RunConfig base = resolve(sweep_src);
            const auto dir = output_root() / (sweep_name.empty() ? "sweep-" + sweep_param : sweep_name);
            const auto rows = sweep(base, sweep_param, parse_values(sweep_values), dir);
            std::cout << format_sweep(sweep_param, rows);
            return 0;
        }
        if (*bi) {
            const RunConfig base = resolve(bisect_src);
            const auto report = bisect_mass(base, lo, hi, tol, budget, !no_robustness);
            const std::string text = format_bisect(report);
            const auto dir = output_root() / (bisect_name.empty() ? "bisect-" + to_string(base.model) : bisect_name);
            write_text(dir / "bisect.txt", format_config(base) + text);
            std::cout << text;
            return 0;
        }
        if (*cv) {
            std::vector<std::size_t> res;
            for (double v : parse_values(conv_res)) res.push_back(static_cast<std::size_t>(v));
            ManufacturedKernel kernel;
            if (conv_case == "advection") {
                kernel.velocity = conv_velocity;
                kernel.diffusive_scaling = false;
                kernel.dt_factor = 0.5 / std::max(1.0, std::abs(conv_velocity));
                kernel.duration = 0.05;
            } else if (conv_case == "zero") {
                kernel.amplitude = 0.0;
            }
            const auto study = convergence_order(kernel, res);
            std::cout << "h\terror\n";
            for (std::size_t i = 0; i < study.h.size(); ++i) {
                std::cout << format_double(study.h[i]) << '\t' << format_double(study.errors[i]) << '\n';
            }
            std::cout << "order = " << (study.exact ? std::string("exact") : format_double(study.order)) << "\n";
            return 0;
        }
        if (*dm) {
            const RunConfig c = resolve(dump_src);
            SparseMatrix m;
            if (which == "heat-1d") {
                m = assemble_heat_periodic(c.nx, 1.0 / static_cast<double>(c.nx), c.dt, c.params.D).matrix();
            } else if (which == "heat-1d-bounded") {
                m = assemble_heat_bounded(c.nx, c.L / static_cast<double>(c.nx), c.dt, c.params.D).matrix();
            } else if (which == "diffusion-2d") {
                m = assemble_diffusion_2d(build_grid_2d(c.params.r, c.nx, c.ny), c.dt, c.params.D).matrix();
            } else if (which == "screened-2d") {
                m = assemble_screened_2d(build_grid_2d(c.params.r, c.nx, c.ny), c.params.alpha).matrix();
            } else {
                const auto u = FaceVelocities1D::constant_periodic(c.nx, c.params.chi);
                m = assemble_advection_periodic(u, 1.0 / static_cast<double>(c.nx), c.dt);
            }
            if (dump_out.empty()) {
                write_coordinate(std::cout, m, which);
            } else {
                std::ofstream os(dump_out);
                if (!os) throw std::runtime_error("cannot write " + dump_out);
                write_coordinate(os, m, which);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
