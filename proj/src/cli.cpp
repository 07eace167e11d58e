#include "mcpc/cli.hpp"

#include "mcpc/feasibility.hpp"
#include "mcpc/report.hpp"
#include "mcpc/scenario.hpp"
#include "mcpc/svg.hpp"
#include "mcpc/trace.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace mcpc {

namespace fs = std::filesystem;

namespace {

struct RegionFlags {
    std::optional<int> channel;  // 1-based
    std::optional<std::string> metric;
    std::optional<int> resolution;
    std::optional<std::string> spacing;
    std::optional<Real> p_max;
    std::optional<Real> tol;
};

void add_region_flags(CLI::App* cmd, RegionFlags& f) {
    cmd->add_option("--channel", f.channel, "Channel index, 1-based");
    cmd->add_option("--metric", f.metric, "sinr or rate");
    cmd->add_option("--resolution", f.resolution, "Grid points per power axis");
    cmd->add_option("--spacing", f.spacing, "linear or log");
    cmd->add_option("--p-max", f.p_max, "Power cap of the sweep (uW)");
    cmd->add_option("--tol", f.tol, "Classification tolerance");
}

void apply_region_flags(Scenario& s, const RegionFlags& f) {
    if (f.channel) {
        if (*f.channel < 1 || static_cast<std::size_t>(*f.channel) > s.network.channel_count) {
            throw InputError("--channel: must lie in 1.." + std::to_string(s.network.channel_count));
        }
        s.region.channel = static_cast<std::size_t>(*f.channel - 1);
    }
    if (f.metric) s.region.metric = parse_metric(*f.metric);
    if (f.resolution) s.region.resolution = *f.resolution;
    if (f.spacing) s.region.spacing = parse_spacing(*f.spacing);
    if (f.p_max) s.region.p_max = *f.p_max;
    if (f.tol) s.region.tol = *f.tol;
    if (s.region.resolution < 2) {
        throw InputError("--resolution: must be at least 2");
    }
}

fs::path output_dir(const std::optional<std::string>& flag) {
    if (flag) {
        return *flag;
    }
    if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') {
        return env;
    }
    return "mcpc-out";
}

Vector parse_point(const std::string& text, const std::string& flag) {
    std::vector<Real> values;
    std::stringstream in(text);
    std::string cell;
    while (std::getline(in, cell, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(cell, &used));
            if (used != cell.size()) {
                throw std::invalid_argument(cell);
            }
        } catch (const std::exception&) {
            throw InputError(flag + ": '" + cell + "' is not a number");
        }
    }
    if (values.empty()) {
        throw InputError(flag + ": expected comma-separated numbers");
    }
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Matrix parse_allotment(const std::string& text, const NetworkSpec& spec) {
    std::vector<Vector> rows;
    std::stringstream in(text);
    std::string row;
    while (std::getline(in, row, ';')) {
        rows.push_back(parse_point(row, "--targets"));
    }
    const auto m = static_cast<Eigen::Index>(spec.pair_count);
    const auto n = static_cast<Eigen::Index>(spec.channel_count);
    if (static_cast<Eigen::Index>(rows.size()) != m) {
        throw InputError("--targets: expected one ';'-separated row per pair");
    }
    Matrix out(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (rows[static_cast<std::size_t>(i)].size() != n) {
            throw InputError("--targets: expected one value per channel in every row");
        }
        out.row(i) = rows[static_cast<std::size_t>(i)].transpose();
    }
    return out;
}

int cmd_feasibility(const std::string& path, const std::optional<std::string>& targets_text,
                    const std::optional<std::string>& out_flag, std::ostream& out) {
    const Scenario s = load_scenario(path);
    const Matrix targets = targets_text ? parse_allotment(*targets_text, s.network)
                                        : initial_state(s).targets;
    const FeasibilityReport r = analyze_feasibility(s.network, targets, s.params.k_gains);
    const nlohmann::json doc = to_json(r);
    if (out_flag || std::getenv(kOutDirEnv) != nullptr) {
        write_report(doc, output_dir(out_flag) / "feasibility.json");
    }
    out << doc.dump(2) << "\n";
    return r.all_channels_feasible ? kExitOk : kExitInfeasible;
}

int cmd_simulate(const std::string& path, const std::optional<std::string>& mode,
                 const std::optional<std::uint64_t>& seed, const std::optional<Real>& max_time,
                 bool plot, const std::optional<std::string>& out_flag, std::ostream& out) {
    Scenario s = load_scenario(path);
    if (mode) s.params.mode = parse_mode(*mode);
    if (seed) s.run.rng_seed = *seed;
    if (max_time) {
        if (!(*max_time >= 0.0)) throw InputError("--max-time: must be nonnegative");
        s.run.max_time = *max_time;
    }
    const SystemState init = initial_state(s);
    const Trajectory t = simulate(s.network, init, s.params, s.run.max_time, s.run.record_stride);

    TraceHeader header;
    header.seed = s.run.rng_seed;
    header.mode = to_string(s.params.mode);
    header.scenario_json = to_json(s).dump();
    if (s.params.mode == Mode::fm) {
        header.absent = {"U"};
    }
    const fs::path dir = output_dir(out_flag);
    write_trace(t, header, dir / "trace.csv");
    write_report(simulation_report(s, t), dir / "report.json");
    if (plot) {
        write_text_atomic(dir / "trace.svg", render_trace_svg(read_trace(dir / "trace.csv")));
    }
    out << "scenario " << s.name << ": " << to_string(t.terminated_by) << " after " << t.steps
        << " steps (t = " << t.final_state.time << " s); trace " << (dir / "trace.csv").string()
        << "\n";
    return t.terminated_by == Termination::divergence ? kExitDivergence : kExitOk;
}

int cmd_region(const std::string& path, const RegionFlags& flags,
               const std::optional<std::string>& out_flag, std::ostream& out) {
    Scenario s = load_scenario(path);
    apply_region_flags(s, flags);
    const RegionResult r = sweep(s.network, s.region.channel, s.sweep_options());
    std::vector<RegionClass> classes;
    if (r.pair_count() == 2) {
        for (const Vector& t : s.region.targets) {
            classes.push_back(classify(t, r, s.region.tol));
        }
    }
    const nlohmann::json doc = region_report(r, s.region.targets, classes);
    const fs::path dir = output_dir(out_flag);
    write_report(doc, dir / "region.json");
    if (r.pair_count() == 2) {
        write_text_atomic(dir / "region.svg", render_region_svg(r, s.region.targets, classes));
    }
    out << doc.dump(2) << "\n";
    return kExitOk;
}

int cmd_decompose(const std::string& path, const std::string& target_text,
                  const RegionFlags& flags, const std::optional<std::string>& out_flag,
                  std::ostream& out, std::ostream& err) {
    Scenario s = load_scenario(path);
    apply_region_flags(s, flags);
    const Vector target = parse_point(target_text, "--target");
    if (static_cast<std::size_t>(target.size()) != s.network.pair_count) {
        throw InputError("--target: expected one coordinate per pair");
    }
    const RegionResult r = sweep(s.network, s.region.channel, s.sweep_options());
    if (r.pair_count() != 2) {
        throw InputError("decompose: only two-pair networks are supported");
    }
    if (classify(target, r, s.region.tol) == RegionClass::M_out) {
        err << "decompose: target lies outside the convex hull (class M)\n";
        return kExitInfeasible;
    }
    const Decomposition d = decompose(s.network, target, r, s.region.tol);
    const nlohmann::json doc = to_json(d, r.metric);
    if (out_flag || std::getenv(kOutDirEnv) != nullptr) {
        write_report(doc, output_dir(out_flag) / "decomposition.json");
    }
    out << doc.dump(2) << "\n";
    return kExitOk;
}

int cmd_plot(const std::string& trace_path, const std::string& out_path,
             const std::optional<std::string>& series, std::ostream& out) {
    const TraceData data = read_trace(trace_path);
    PlotStyle style;
    if (series) {
        style.series.clear();
        std::stringstream in(*series);
        std::string item;
        while (std::getline(in, item, ',')) {
            style.series.push_back(item);
        }
    }
    write_text_atomic(out_path, render_trace_svg(data, style));
    out << "wrote " << out_path << "\n";
    return kExitOk;
}

}  // namespace

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-channel distributed power control: feasibility, dynamics, regions"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    std::string scenario_path;
    std::optional<std::string> out_flag;

    auto* feas = app.add_subcommand("feasibility", "Per-channel rho, p* and certificate");
    std::optional<std::string> targets_text;
    feas->add_option("scenario", scenario_path, "Scenario JSON")->required();
    feas->add_option("--targets", targets_text, "Allotment rows 'x11,x12;x21,x22'");
    feas->add_option("--out", out_flag, "Directory for feasibility.json");

    auto* sim = app.add_subcommand("simulate", "Integrate the dynamics and write a trace");
    std::optional<std::string> mode;
    std::optional<std::uint64_t> seed;
    std::optional<Real> max_time;
    bool plot = false;
    sim->add_option("scenario", scenario_path, "Scenario JSON")->required();
    sim->add_option("--mode", mode, "fm, theorem1 or theorem2");
    sim->add_option("--seed", seed, "Override run.rng_seed");
    sim->add_option("--max-time", max_time, "Override run.max_time (s)");
    sim->add_flag("--plot", plot, "Also write trace.svg");
    sim->add_option("--out", out_flag, "Output directory");

    auto* reg = app.add_subcommand("region", "Sweep the achievable SINR or rate region");
    RegionFlags region_flags;
    reg->add_option("scenario", scenario_path, "Scenario JSON")->required();
    add_region_flags(reg, region_flags);
    reg->add_option("--out", out_flag, "Output directory");

    auto* dec = app.add_subcommand("decompose", "Time-sharing decomposition of a target");
    std::string target_text;
    RegionFlags decompose_flags;
    dec->add_option("scenario", scenario_path, "Scenario JSON")->required();
    dec->add_option("--target", target_text, "Target point v1,v2")->required();
    add_region_flags(dec, decompose_flags);
    dec->add_option("--out", out_flag, "Directory for decomposition.json");

    auto* plt = app.add_subcommand("plot", "Render a trace as SVG");
    std::string trace_path;
    std::string svg_path;
    std::optional<std::string> series;
    plt->add_option("trace", trace_path, "Trace CSV")->required();
    plt->add_option("--out", svg_path, "SVG file")->required();
    plt->add_option("--series", series, "Comma-separated subset of p,x,sinr,w");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (*feas) return cmd_feasibility(scenario_path, targets_text, out_flag, out);
        if (*sim) return cmd_simulate(scenario_path, mode, seed, max_time, plot, out_flag, out);
        if (*reg) return cmd_region(scenario_path, region_flags, out_flag, out);
        if (*dec) return cmd_decompose(scenario_path, target_text, decompose_flags, out_flag, out, err);
        if (*plt) return cmd_plot(trace_path, svg_path, series, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitInputError;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}

}  // namespace mcpc
