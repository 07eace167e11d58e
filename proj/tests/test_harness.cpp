#include "catch_amalgamated.hpp"

#include "mcpc/cli.hpp"
#include "mcpc/report.hpp"
#include "mcpc/scenario.hpp"
#include "mcpc/svg.hpp"
#include "mcpc/trace.hpp"
#include "oracles.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace mcpc;
using Catch::Approx;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string scenario_path(const std::string& name) {
    return std::string(MCPC_SCENARIO_DIR) + "/" + name + ".json";
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("mcpc-test-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun cli(std::vector<std::string> args) {
    args.insert(args.begin(), "mcpc");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_command(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

json minimal_doc() {
    return json::parse(R"({
        "schema": 1,
        "name": "tiny",
        "network": {
            "pairs": 2, "channels": 1,
            "gains": [[1.0, 0.1], [0.1, 1.0]],
            "noise": 0.04,
            "avg_targets": 3
        },
        "params": {"mode": "fm"},
        "initial": {"powers": [[0.5], [0.5]]},
        "run": {"max_time": 1.0}
    })");
}

fs::path write_doc(const fs::path& dir, const json& doc) {
    const fs::path p = dir / "scenario.json";
    std::ofstream(p) << doc.dump(2);
    return p;
}

}  // namespace

TEST_CASE("bundled example scenario loads with its documented values", "[harness]") {
    const Scenario s = load_scenario(scenario_path("example1"));
    CHECK(s.network.pair_count == 2);
    CHECK(s.network.channel_count == 2);
    CHECK(s.gains_from_geometry);
    CHECK((s.network.avg_targets.array() == 3.0).all());
    CHECK((s.params.zeta.array() == 20.0).all());
    CHECK((s.params.k_gains.array() == 1.0).all());
    CHECK((s.params.b_gains.array() == 200.0).all());
    CHECK((s.network.noise.array() == 0.04).all());
    CHECK(s.params.p_max == 1e6);
    CHECK(s.run.rng_seed.has_value());
    const Real cross = std::pow(2.5 / std::hypot(2.5, 8.0), 4.0);
    CHECK(s.network.gains[0](0, 1) == Approx(cross).epsilon(1e-14));
    CHECK(s.network.gains[1](1, 0) == Approx(cross).epsilon(1e-14));
}

TEST_CASE("every bundled scenario loads and round-trips", "[harness]") {
    for (const char* name : {"example1", "example2", "example2_1p5m", "fm_symmetric",
                             "weak_coupling", "strong_coupling"}) {
        INFO(name);
        const Scenario s = load_scenario(scenario_path(name));
        const json once = to_json(s);
        const json twice = to_json(parse_scenario(once));
        CHECK(once == twice);
    }
}

TEST_CASE("scenario errors name the offending field", "[harness]") {
    json doc = minimal_doc();
    doc["network"].erase("avg_targets");
    CHECK_THROWS_WITH(parse_scenario(doc), Catch::Matchers::ContainsSubstring("avg_targets"));

    doc = minimal_doc();
    doc["network"]["bogus"] = 1;
    CHECK_THROWS_WITH(parse_scenario(doc), Catch::Matchers::ContainsSubstring("bogus"));

    doc = minimal_doc();
    doc["initial"] = json{{"powers", json{{"random", json{{"low", 0.1}, {"high", 1.0}}}}}};
    CHECK_THROWS_WITH(parse_scenario(doc), Catch::Matchers::ContainsSubstring("rng_seed"));

    doc = minimal_doc();
    doc["network"]["noise"] = -1.0;
    CHECK_THROWS_AS(parse_scenario(doc), InputError);
}

TEST_CASE("scenario syntax errors carry a line number", "[harness]") {
    const fs::path dir = fresh_dir("syntax");
    const fs::path p = dir / "broken.json";
    std::ofstream(p) << "{\n  \"name\": \"x\",\n  \"network\": {,\n}\n";
    CHECK_THROWS_WITH(load_scenario(p), Catch::Matchers::ContainsSubstring("line 3"));
    CHECK_THROWS_AS(load_scenario(dir / "missing.json"), std::exception);
}

TEST_CASE("scalar fields broadcast to per-pair and per-channel shapes", "[harness]") {
    json doc = minimal_doc();
    doc["network"]["channels"] = 3;
    doc["initial"]["powers"] = 0.25;
    doc["params"]["c"] = 2.0;
    const Scenario s = parse_scenario(doc);
    CHECK(s.network.gains.size() == 3);
    CHECK(s.network.noise.rows() == 2);
    CHECK(s.network.noise.cols() == 3);
    CHECK((s.params.c_gains.array() == 2.0).all());
    REQUIRE(s.initial.powers.has_value());
    CHECK((s.initial.powers->array() == 0.25).all());
}

TEST_CASE("random initial powers are reproducible per seed", "[harness]") {
    json doc = minimal_doc();
    doc["initial"] = json{{"powers", json{{"random", json{{"low", 0.2}, {"high", 0.4}}}}}};
    doc["run"]["rng_seed"] = 9;
    const Scenario s = parse_scenario(doc);
    const SystemState a = initial_state(s);
    const SystemState b = initial_state(s);
    CHECK((a.powers - b.powers).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.powers.array() >= 0.2).all());
    CHECK((a.powers.array() < 0.4).all());

    // Independent reimplementation of the draw: row-major, top 53 bits.
    std::mt19937_64 rng(9);
    for (int i = 0; i < 2; ++i) {
        const Real u = static_cast<Real>(rng() >> 11) * 0x1.0p-53;
        CHECK(a.powers(i, 0) == 0.2 + (0.4 - 0.2) * u);
    }
}

TEST_CASE("trace round-trips every recorded value exactly", "[harness]") {
    const Scenario s = load_scenario(scenario_path("example1"));
    const Trajectory t = simulate(s.network, initial_state(s), s.params, 2.0, 50);
    TraceHeader h;
    h.seed = s.run.rng_seed;
    h.mode = to_string(s.params.mode);
    h.scenario_json = to_json(s).dump();
    const std::string text = render_trace(t, h);
    const TraceData d = parse_trace(text);
    const std::size_t m = 2;
    const std::size_t n = 2;
    CHECK(d.columns.size() == 1 + 4 * m * n + m + 1 + n);
    CHECK(d.columns == trace_columns(m, n));
    REQUIRE(d.rows.size() == t.samples.size());
    CHECK(d.header.at("tool") == kToolVersion);
    CHECK(d.header.at("seed") == std::to_string(*s.run.rng_seed));
    CHECK(json::parse(d.header.at("scenario")) == to_json(s));
    for (std::size_t r = 0; r < d.rows.size(); ++r) {
        const TrajectorySample& smp = t.samples[r];
        CHECK(d.rows[r][d.column("time")] == smp.state.time);
        CHECK(d.rows[r][d.column("p_2_1")] == smp.state.powers(1, 0));
        CHECK(d.rows[r][d.column("x_1_2")] == smp.state.targets(0, 1));
        CHECK(d.rows[r][d.column("sinr_2_2")] == smp.metrics.sinr(1, 1));
        CHECK(d.rows[r][d.column("theta_1")] == smp.monitor.theta(0));
        CHECK(d.rows[r][d.column("U")] == smp.monitor.utility);
    }
    // Rendering is a pure function of the trajectory.
    CHECK(render_trace(t, h) == text);
    CHECK_THROWS_AS(d.column("nope"), InputError);
}

TEST_CASE("numbers print shortest and parse back exactly", "[harness][property]") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<Real> u(-30.0, 30.0);
    for (int t = 0; t < 2000; ++t) {
        const Real v = std::ldexp(u(rng), static_cast<int>(u(rng)));
        CHECK(std::stod(format_number(v)) == v);
    }
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(3.0) == "3");
}

TEST_CASE("malformed traces are rejected", "[harness]") {
    CHECK_THROWS_AS(parse_trace("# tool: x\ntime,p_1_1\n1,2,3\n"), InputError);
    CHECK_THROWS_AS(parse_trace("# tool: x\ntime,p_1_1\n1,abc\n"), InputError);
}

TEST_CASE("feasibility report fields", "[harness]") {
    const Scenario s = load_scenario(scenario_path("strong_coupling"));
    const Matrix uniform = Matrix::Constant(2, 2, 3.0);
    const FeasibilityReport bad = analyze_feasibility(s.network, uniform, s.params.k_gains);
    CHECK_FALSE(bad.all_channels_feasible);
    const json jb = to_json(bad);
    CHECK(jb["channels"][0]["rho"].get<Real>() == Approx(1.2).margin(1e-9));
    CHECK_FALSE(jb["channels"][0]["feasible"].get<bool>());

    Matrix split(2, 2);
    split << 5.0, 1.0, 1.0, 5.0;
    const FeasibilityReport good = analyze_feasibility(s.network, split, s.params.k_gains);
    CHECK(good.all_channels_feasible);
    const json jg = to_json(good);
    CHECK(jg["channels"][0]["rho"].get<Real>() == Approx(std::sqrt(0.8)).margin(1e-9));
    CHECK(jg["channels"][0]["certificate"]["valid"].get<bool>());
    CHECK(jg["channels"][0]["certificate"]["min_eigenvalue"].get<Real>() > 0.0);
    CHECK(jg["channels"][0]["p_star_residual"].get<Real>() < 1e-9);
}

TEST_CASE("svg output is well formed", "[harness]") {
    const Scenario s = load_scenario(scenario_path("strong_coupling"));
    const Trajectory t = simulate(s.network, initial_state(s), s.params, 1.0, 10);
    TraceHeader h;
    h.mode = "theorem2";
    const TraceData d = parse_trace(render_trace(t, h));
    std::string why;
    const std::string trace_svg = render_trace_svg(d);
    CHECK(oracle::well_formed_xml(trace_svg, &why));
    INFO(why);
    CHECK(trace_svg.find("<svg") != std::string::npos);

    SweepOptions o;
    o.resolution = 60;
    o.p_max = 1.0;
    const RegionResult r = sweep(s.network, 0, o);
    Vector t1(2);
    t1 << 3.0, 3.0;
    const std::string region_svg = render_region_svg(r, {t1}, {classify(t1, r, 1e-9)});
    CHECK(oracle::well_formed_xml(region_svg, &why));
    INFO(why);

    TraceData empty = d;
    empty.rows.clear();
    CHECK_THROWS_AS(render_trace_svg(empty), InputError);
}

TEST_CASE("atomic writes leave no temporary behind", "[harness]") {
    const fs::path dir = fresh_dir("atomic");
    write_text_atomic(dir / "sub" / "a.txt", "hello\n");
    CHECK(slurp(dir / "sub" / "a.txt") == "hello\n");
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "sub")) ++entries;
    CHECK(entries == 1);
}

TEST_CASE("cli exit codes", "[harness][cli]") {
    const fs::path dir = fresh_dir("cli");

    CHECK(cli({"feasibility", scenario_path("example1")}).code == kExitOk);
    const CliRun infeasible = cli({"feasibility", scenario_path("example2")});
    CHECK(infeasible.code == kExitInfeasible);
    CHECK(json::parse(infeasible.out)["channels"][0]["rho"].get<Real>() > 1.0);

    CHECK(cli({"feasibility", (dir / "absent.json").string()}).code == kExitInputError);
    CHECK(cli({"simulate"}).code == kExitInputError);
    CHECK(cli({"frobnicate"}).code == kExitInputError);
    CHECK(cli({"--help"}).code == kExitOk);

    const CliRun sim = cli({"simulate", scenario_path("fm_symmetric"), "--plot", "--out",
                            (dir / "sim").string()});
    CHECK(sim.code == kExitOk);
    CHECK(fs::exists(dir / "sim" / "trace.csv"));
    CHECK(fs::exists(dir / "sim" / "report.json"));
    CHECK(fs::exists(dir / "sim" / "trace.svg"));
    const json report = json::parse(slurp(dir / "sim" / "report.json"));
    CHECK(report["terminated_by"] == "equilibrium");
    const TraceData fm = read_trace(dir / "sim" / "trace.csv");
    CHECK(fm.header.at("absent").find('U') != std::string::npos);

    CHECK(cli({"plot", (dir / "sim" / "trace.csv").string(), "--out",
               (dir / "replot.svg").string(), "--series", "p,w"})
              .code == kExitOk);
    CHECK(oracle::well_formed_xml(slurp(dir / "replot.svg")));

    // A header-only trace has nothing to plot.
    const std::string csv = slurp(dir / "sim" / "trace.csv");
    const std::size_t header_end = csv.find('\n', csv.find("time,"));
    std::ofstream(dir / "empty.csv") << csv.substr(0, header_end + 1);
    CHECK(cli({"plot", (dir / "empty.csv").string(), "--out", (dir / "e.svg").string()}).code ==
          kExitInputError);

    CHECK(cli({"region", scenario_path("strong_coupling"), "--resolution", "50", "--out",
               (dir / "reg").string()})
              .code == kExitOk);
    CHECK(fs::exists(dir / "reg" / "region.json"));
    CHECK(fs::exists(dir / "reg" / "region.svg"));
    CHECK(cli({"region", scenario_path("strong_coupling"), "--channel", "3"}).code ==
          kExitInputError);

    CHECK(cli({"decompose", scenario_path("strong_coupling"), "--target", "3,3", "--resolution",
               "50", "--out", (dir / "dec").string()})
              .code == kExitOk);
    CHECK(cli({"decompose", scenario_path("strong_coupling"), "--target", "30,30",
               "--resolution", "50"})
              .code == kExitInfeasible);
    CHECK(cli({"decompose", scenario_path("strong_coupling"), "--target", "3,x"}).code ==
          kExitInputError);
}

TEST_CASE("cli reports divergence", "[harness][cli]") {
    const fs::path dir = fresh_dir("diverge");
    json doc = minimal_doc();
    doc["params"]["k"] = 1e6;
    doc["params"]["step"] = 1.0;
    const fs::path p = write_doc(dir, doc);
    const CliRun run = cli({"simulate", p.string(), "--out", (dir / "out").string()});
    CHECK(run.code == kExitDivergence);
    const json report = json::parse(slurp(dir / "out" / "report.json"));
    CHECK(report["terminated_by"] == "divergence");
}

TEST_CASE("cli simulate is byte-for-byte deterministic", "[harness][cli]") {
    const fs::path dir = fresh_dir("determinism");
    for (const char* run : {"a", "b"}) {
        REQUIRE(cli({"simulate", scenario_path("example1"), "--max-time", "3", "--out",
                     (dir / run).string()})
                    .code == kExitOk);
    }
    CHECK(slurp(dir / "a" / "trace.csv") == slurp(dir / "b" / "trace.csv"));
    CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));
}
