#include "mcpc/scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace mcpc {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

std::string join(const std::string& path, std::size_t index) {
    return path + "[" + std::to_string(index) + "]";
}

void check_object(const json& j, const std::string& path) {
    if (!j.is_object()) {
        throw InputError(path + ": expected an object");
    }
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
    check_object(j, path);
    for (const auto& item : j.items()) {
        if (allowed.count(item.key()) == 0) {
            throw InputError(join(path, item.key()) + ": unknown field");
        }
    }
}

const json& require(const json& j, const std::string& key, const std::string& path) {
    const auto it = j.find(key);
    if (it == j.end()) {
        throw InputError(join(path, key) + ": required field is missing");
    }
    return *it;
}

Real number(const json& j, const std::string& path) {
    if (!j.is_number()) {
        throw InputError(path + ": expected a number");
    }
    return j.get<Real>();
}

// null stands for +infinity, which JSON cannot spell.
Real number_or_inf(const json& j, const std::string& path) {
    return j.is_null() ? std::numeric_limits<Real>::infinity() : number(j, path);
}

json inf_or_number(Real v) { return std::isinf(v) ? json(nullptr) : json(v); }

std::int64_t integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) {
        throw InputError(path + ": expected an integer");
    }
    return j.get<std::int64_t>();
}

std::string text(const json& j, const std::string& path) {
    if (!j.is_string()) {
        throw InputError(path + ": expected a string");
    }
    return j.get<std::string>();
}

std::vector<Real> number_list(const json& j, const std::string& path) {
    if (!j.is_array()) {
        throw InputError(path + ": expected an array of numbers");
    }
    std::vector<Real> out;
    for (std::size_t a = 0; a < j.size(); ++a) {
        out.push_back(number(j[a], join(path, a)));
    }
    return out;
}

/// Scalar or per-pair list.
Vector pair_vector(const json& j, std::size_t m, const std::string& path) {
    const auto mm = static_cast<Eigen::Index>(m);
    if (j.is_number()) {
        return Vector::Constant(mm, j.get<Real>());
    }
    const std::vector<Real> v = number_list(j, path);
    if (v.size() != m) {
        throw InputError(path + ": expected " + std::to_string(m) + " entries (one per pair)");
    }
    return Eigen::Map<const Vector>(v.data(), mm);
}

/// Scalar, per-pair list, or rows x cols nested list.
Matrix grid_matrix(const json& j, std::size_t rows, std::size_t cols, const std::string& path) {
    const auto r = static_cast<Eigen::Index>(rows);
    const auto c = static_cast<Eigen::Index>(cols);
    if (j.is_number()) {
        return Matrix::Constant(r, c, j.get<Real>());
    }
    if (!j.is_array() || j.size() != rows) {
        throw InputError(path + ": expected a number or " + std::to_string(rows) + " rows");
    }
    Matrix out(r, c);
    for (std::size_t i = 0; i < rows; ++i) {
        const std::string row_path = join(path, i);
        if (j[i].is_number()) {
            out.row(static_cast<Eigen::Index>(i)).setConstant(j[i].get<Real>());
            continue;
        }
        const std::vector<Real> row = number_list(j[i], row_path);
        if (row.size() != cols) {
            throw InputError(row_path + ": expected " + std::to_string(cols) + " entries");
        }
        for (std::size_t k = 0; k < cols; ++k) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
        }
    }
    return out;
}

json matrix_json(const Matrix& a) {
    json out = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < a.cols(); ++k) {
            row.push_back(a(i, k));
        }
        out.push_back(row);
    }
    return out;
}

json vector_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

std::vector<Point2> point_list(const json& j, const std::string& path) {
    if (!j.is_array()) {
        throw InputError(path + ": expected an array of [x, y] points");
    }
    std::vector<Point2> out;
    for (std::size_t a = 0; a < j.size(); ++a) {
        const std::vector<Real> xy = number_list(j[a], join(path, a));
        if (xy.size() != 2) {
            throw InputError(join(path, a) + ": expected [x, y]");
        }
        out.push_back(Point2{xy[0], xy[1]});
    }
    return out;
}

json points_json(const std::vector<Point2>& pts) {
    json out = json::array();
    for (const Point2& p : pts) {
        out.push_back(json::array({p.x, p.y}));
    }
    return out;
}

void parse_network(const json& j, Scenario& s) {
    const std::string path = "network";
    check_keys(j,
               {"pairs", "channels", "geometry", "gains", "noise", "avg_targets"}, path);
    const std::int64_t pairs = integer(require(j, "pairs", path), "network.pairs");
    const std::int64_t channels = integer(require(j, "channels", path), "network.channels");
    if (pairs < 1) throw InputError("network.pairs: must be positive");
    if (channels < 1) throw InputError("network.channels: must be positive");
    NetworkSpec& net = s.network;
    net.pair_count = static_cast<std::size_t>(pairs);
    net.channel_count = static_cast<std::size_t>(channels);
    const std::size_t m = net.pair_count;
    const std::size_t n = net.channel_count;

    const bool has_geometry = j.contains("geometry");
    const bool has_gains = j.contains("gains");
    if (has_geometry == has_gains) {
        throw InputError("network: give exactly one of geometry or gains");
    }
    if (has_geometry) {
        const json& g = j["geometry"];
        const std::string gp = "network.geometry";
        check_keys(g, {"transmitters", "receivers", "exponent", "reference_distance"}, gp);
        Geometry geo;
        geo.transmitters = point_list(require(g, "transmitters", gp), gp + ".transmitters");
        geo.receivers = point_list(require(g, "receivers", gp), gp + ".receivers");
        if (g.contains("exponent")) geo.exponent = number(g["exponent"], gp + ".exponent");
        if (g.contains("reference_distance")) {
            geo.reference_distance = number(g["reference_distance"], gp + ".reference_distance");
        }
        if (geo.transmitters.size() != m || geo.receivers.size() != m) {
            throw InputError(gp + ": expected " + std::to_string(m) +
                             " transmitters and receivers");
        }
        const Matrix gm = build_gains_from_geometry(geo);
        net.gains.assign(n, gm);
        net.geometry = geo;
        s.gains_from_geometry = true;
    } else {
        const json& g = j["gains"];
        const std::string gp = "network.gains";
        if (!g.is_array() || g.empty()) {
            throw InputError(gp + ": expected a matrix or one matrix per channel");
        }
        const bool per_channel = g[0].is_array() && !g[0].empty() && g[0][0].is_array();
        if (per_channel) {
            if (g.size() != n) {
                throw InputError(gp + ": expected " + std::to_string(n) + " channel matrices");
            }
            for (std::size_t k = 0; k < n; ++k) {
                net.gains.push_back(grid_matrix(g[k], m, m, join(gp, k)));
            }
        } else {
            net.gains.assign(n, grid_matrix(g, m, m, gp));
        }
    }
    net.noise = grid_matrix(require(j, "noise", path), m, n, "network.noise");
    net.avg_targets = pair_vector(require(j, "avg_targets", path), m, "network.avg_targets");
    net.validate();
}

void parse_params(const json& j, Scenario& s) {
    const std::string path = "params";
    check_keys(j,
               {"mode", "k", "c", "b0", "zeta", "d", "p_max", "step", "b_safety", "eq_tol",
                "x_dot_eps", "gain_rule", "b_stability", "dwell_steps", "divergence_factor"},
               path);
    const std::size_t m = s.network.pair_count;
    const std::size_t n = s.network.channel_count;
    AlgorithmParams& p = s.params;
    if (j.contains("mode")) p.mode = parse_mode(text(j["mode"], "params.mode"));
    if (j.contains("k")) p.k_gains = pair_vector(j["k"], m, "params.k");
    if (j.contains("c")) p.c_gains = grid_matrix(j["c"], m, n, "params.c");
    if (j.contains("b0")) p.b_gains = grid_matrix(j["b0"], m, n, "params.b0");
    if (j.contains("zeta")) p.zeta = pair_vector(j["zeta"], m, "params.zeta");
    if (j.contains("d")) p.d_weights = pair_vector(j["d"], m, "params.d");
    if (j.contains("p_max")) p.p_max = number(j["p_max"], "params.p_max");
    if (j.contains("step")) p.step = number(j["step"], "params.step");
    if (j.contains("b_safety")) p.b_safety = number(j["b_safety"], "params.b_safety");
    if (j.contains("eq_tol")) p.eq_tol = number(j["eq_tol"], "params.eq_tol");
    if (j.contains("x_dot_eps")) p.x_dot_eps = number(j["x_dot_eps"], "params.x_dot_eps");
    if (j.contains("gain_rule")) {
        p.gain_rule = parse_gain_rule(text(j["gain_rule"], "params.gain_rule"));
    }
    if (j.contains("b_stability")) {
        p.b_stability = number_or_inf(j["b_stability"], "params.b_stability");
    }
    if (j.contains("dwell_steps")) {
        p.dwell_steps = static_cast<int>(integer(j["dwell_steps"], "params.dwell_steps"));
    }
    if (j.contains("divergence_factor")) {
        p.divergence_factor = number(j["divergence_factor"], "params.divergence_factor");
    }
}

void parse_initial(const json& j, Scenario& s) {
    const std::string path = "initial";
    check_keys(j, {"powers", "targets"}, path);
    const std::size_t m = s.network.pair_count;
    const std::size_t n = s.network.channel_count;
    if (j.contains("powers")) {
        const json& pw = j["powers"];
        if (pw.is_object()) {
            check_keys(pw, {"random"}, "initial.powers");
            const json& r = require(pw, "random", "initial.powers");
            check_keys(r, {"low", "high"}, "initial.powers.random");
            RandomPowers rp;
            if (r.contains("low")) rp.low = number(r["low"], "initial.powers.random.low");
            if (r.contains("high")) rp.high = number(r["high"], "initial.powers.random.high");
            s.initial.random_powers = rp;
        } else {
            s.initial.powers = grid_matrix(pw, m, n, "initial.powers");
        }
    }
    if (j.contains("targets")) {
        s.initial.targets = grid_matrix(j["targets"], m, n, "initial.targets");
    }
}

void parse_run(const json& j, Scenario& s) {
    check_keys(j, {"max_time", "record_stride", "rng_seed"}, "run");
    if (j.contains("max_time")) s.run.max_time = number(j["max_time"], "run.max_time");
    if (j.contains("record_stride")) {
        s.run.record_stride = integer(j["record_stride"], "run.record_stride");
    }
    if (j.contains("rng_seed")) {
        const json& seed = j["rng_seed"];
        if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() &&
                                          seed.get<std::int64_t>() < 0)) {
            throw InputError("run.rng_seed: expected a nonnegative 64-bit integer");
        }
        s.run.rng_seed = seed.get<std::uint64_t>();
    }
}

void parse_region(const json& j, Scenario& s) {
    const std::string path = "region";
    check_keys(j, {"p_max", "resolution", "metric", "spacing", "channel", "tol", "targets"}, path);
    RegionSpec& r = s.region;
    if (j.contains("p_max")) r.p_max = number(j["p_max"], "region.p_max");
    if (j.contains("resolution")) {
        r.resolution = static_cast<int>(integer(j["resolution"], "region.resolution"));
    }
    if (j.contains("metric")) r.metric = parse_metric(text(j["metric"], "region.metric"));
    if (j.contains("spacing")) r.spacing = parse_spacing(text(j["spacing"], "region.spacing"));
    if (j.contains("channel")) {
        const std::int64_t ch = integer(j["channel"], "region.channel");
        if (ch < 1 || static_cast<std::size_t>(ch) > s.network.channel_count) {
            throw InputError("region.channel: must lie in 1.." +
                             std::to_string(s.network.channel_count));
        }
        r.channel = static_cast<std::size_t>(ch - 1);
    }
    if (j.contains("tol")) r.tol = number(j["tol"], "region.tol");
    if (j.contains("targets")) {
        const json& t = j["targets"];
        if (!t.is_array()) throw InputError("region.targets: expected a list of points");
        for (std::size_t a = 0; a < t.size(); ++a) {
            const std::vector<Real> v = number_list(t[a], join("region.targets", a));
            if (v.size() != s.network.pair_count) {
                throw InputError(join("region.targets", a) + ": expected one coordinate per pair");
            }
            r.targets.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
        }
    }
}

void validate_scenario(const Scenario& s) {
    const NetworkSpec& net = s.network;
    s.params.validate(net);
    if (s.initial.powers) {
        if (((s.initial.powers->array() < 0.0) || (s.initial.powers->array() > s.params.p_max)).any()) {
            throw InputError("initial.powers: entries must lie in [0, p_max]");
        }
    } else if (s.initial.random_powers) {
        const RandomPowers& r = *s.initial.random_powers;
        if (!(r.low >= 0.0 && r.low <= r.high && r.high <= s.params.p_max)) {
            throw InputError("initial.powers.random: need 0 <= low <= high <= p_max");
        }
        if (!s.run.rng_seed) {
            throw InputError("run.rng_seed: required when initial powers are random");
        }
    }
    if (s.initial.targets && (s.initial.targets->array() < 0.0).any()) {
        throw InputError("initial.targets: entries must be nonnegative");
    }
    if (!(s.run.max_time >= 0.0) || !std::isfinite(s.run.max_time)) {
        throw InputError("run.max_time: must be a nonnegative number");
    }
    if (s.run.record_stride < 1) {
        throw InputError("run.record_stride: must be at least 1");
    }
    if (s.region.resolution < 2) {
        throw InputError("region.resolution: must be at least 2");
    }
    if (s.region.p_max && !(*s.region.p_max > 0.0)) {
        throw InputError("region.p_max: must be positive");
    }
    if (!(s.region.tol >= 0.0)) {
        throw InputError("region.tol: must be nonnegative");
    }
}

}  // namespace

SweepOptions Scenario::sweep_options() const {
    SweepOptions o;
    o.resolution = region.resolution;
    o.metric = region.metric;
    o.spacing = region.spacing;
    o.p_max = region.p_max.value_or(params.p_max);
    return o;
}

Scenario parse_scenario(const json& doc) {
    check_keys(doc, {"schema", "name", "description", "network", "params", "initial", "run",
                     "region"},
               "scenario");
    const std::int64_t schema = integer(require(doc, "schema", ""), "schema");
    if (schema != kScenarioSchema) {
        throw InputError("schema: unsupported version " + std::to_string(schema));
    }
    Scenario s;
    s.name = text(require(doc, "name", ""), "name");
    if (doc.contains("description")) s.description = text(doc["description"], "description");
    parse_network(require(doc, "network", ""), s);
    s.params = AlgorithmParams::defaults(s.network);
    if (doc.contains("params")) parse_params(doc["params"], s);
    if (doc.contains("run")) parse_run(doc["run"], s);
    if (doc.contains("initial")) parse_initial(doc["initial"], s);
    if (!s.initial.powers && !s.initial.random_powers) {
        s.initial.random_powers = RandomPowers{};
    }
    if (doc.contains("region")) parse_region(doc["region"], s);
    validate_scenario(s);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError(path.string() + ": cannot open scenario file");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    try {
        return parse_scenario(doc);
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

json to_json(const Scenario& s) {
    const NetworkSpec& net = s.network;
    json network;
    network["pairs"] = net.pair_count;
    network["channels"] = net.channel_count;
    if (s.gains_from_geometry && net.geometry) {
        const Geometry& g = *net.geometry;
        network["geometry"] = {{"transmitters", points_json(g.transmitters)},
                               {"receivers", points_json(g.receivers)},
                               {"exponent", g.exponent},
                               {"reference_distance", g.reference_distance}};
    } else {
        json gains = json::array();
        for (const Matrix& g : net.gains) {
            gains.push_back(matrix_json(g));
        }
        network["gains"] = gains;
    }
    network["noise"] = matrix_json(net.noise);
    network["avg_targets"] = vector_json(net.avg_targets);

    const AlgorithmParams& p = s.params;
    json params = {{"mode", to_string(p.mode)},
                   {"k", vector_json(p.k_gains)},
                   {"c", matrix_json(p.c_gains)},
                   {"b0", matrix_json(p.b_gains)},
                   {"zeta", vector_json(p.zeta)},
                   {"d", vector_json(p.d_weights)},
                   {"p_max", p.p_max},
                   {"step", p.step},
                   {"b_safety", p.b_safety},
                   {"eq_tol", p.eq_tol},
                   {"x_dot_eps", p.x_dot_eps},
                   {"gain_rule", to_string(p.gain_rule)},
                   {"b_stability", inf_or_number(p.b_stability)},
                   {"dwell_steps", p.dwell_steps},
                   {"divergence_factor", p.divergence_factor}};

    json initial = json::object();
    if (s.initial.powers) {
        initial["powers"] = matrix_json(*s.initial.powers);
    } else if (s.initial.random_powers) {
        initial["powers"] = {{"random",
                              {{"low", s.initial.random_powers->low},
                               {"high", s.initial.random_powers->high}}}};
    }
    if (s.initial.targets) {
        initial["targets"] = matrix_json(*s.initial.targets);
    }

    json run = {{"max_time", s.run.max_time}, {"record_stride", s.run.record_stride}};
    if (s.run.rng_seed) {
        run["rng_seed"] = *s.run.rng_seed;
    }

    json region = {{"resolution", s.region.resolution},
                   {"metric", to_string(s.region.metric)},
                   {"spacing", to_string(s.region.spacing)},
                   {"channel", s.region.channel + 1},
                   {"tol", s.region.tol}};
    if (s.region.p_max) {
        region["p_max"] = *s.region.p_max;
    }
    if (!s.region.targets.empty()) {
        json targets = json::array();
        for (const Vector& t : s.region.targets) {
            targets.push_back(vector_json(t));
        }
        region["targets"] = targets;
    }

    json doc = {{"schema", kScenarioSchema}, {"name", s.name}};
    if (!s.description.empty()) {
        doc["description"] = s.description;
    }
    doc["network"] = network;
    doc["params"] = params;
    doc["initial"] = initial;
    doc["run"] = run;
    doc["region"] = region;
    return doc;
}

Real unit_uniform(std::uint64_t bits) {
    return static_cast<Real>(bits >> 11) * 0x1.0p-53;
}

SystemState initial_state(const Scenario& s) {
    const auto m = static_cast<Eigen::Index>(s.network.pair_count);
    const auto n = static_cast<Eigen::Index>(s.network.channel_count);
    SystemState st;
    if (s.initial.powers) {
        st.powers = *s.initial.powers;
    } else {
        if (!s.initial.random_powers || !s.run.rng_seed) {
            throw InputError("initial.powers: random powers need run.rng_seed");
        }
        const RandomPowers& r = *s.initial.random_powers;
        std::mt19937_64 rng(*s.run.rng_seed);
        st.powers.resize(m, n);
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index k = 0; k < n; ++k) {
                st.powers(i, k) = r.low + (r.high - r.low) * unit_uniform(rng());
            }
        }
    }
    st.targets = s.initial.targets ? *s.initial.targets
                                   : Matrix(s.network.avg_targets.replicate(1, n));
    st.time = 0.0;
    return st;
}

}  // namespace mcpc
