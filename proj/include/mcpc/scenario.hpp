#pragma once

#include "mcpc/dynamics.hpp"
#include "mcpc/region.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mcpc {

inline constexpr int kScenarioSchema = 1;

struct RandomPowers {
    Real low = 0.01;
    Real high = 1.0;
};

/// Initial state description. Exactly one of powers / random_powers is set
/// after loading; targets default to the average targets on every channel.
struct InitialSpec {
    std::optional<Matrix> powers;
    std::optional<RandomPowers> random_powers;
    std::optional<Matrix> targets;
};

struct RunSpec {
    Real max_time = 100.0;
    std::int64_t record_stride = 10;
    std::optional<std::uint64_t> rng_seed;
};

struct RegionSpec {
    std::optional<Real> p_max;  // falls back to params.p_max
    int resolution = 200;
    Metric metric = Metric::sinr;
    Spacing spacing = Spacing::linear;
    std::size_t channel = 0;  // 0-based; 1-based in files and on the command line
    Real tol = 1e-9;
    std::vector<Vector> targets;
};

struct Scenario {
    std::string name;
    std::string description;
    NetworkSpec network;
    /// Channels built from geometry; explicit gains otherwise.
    bool gains_from_geometry = false;
    AlgorithmParams params;
    InitialSpec initial;
    RunSpec run;
    RegionSpec region;

    [[nodiscard]] SweepOptions sweep_options() const;
};

/// Parses and validates a scenario document. Field errors name the JSON path.
///
/// Defaults: params as AlgorithmParams::defaults; run.max_time 100 s,
/// run.record_stride 10; initial powers uniform in [0.01, 1] (requires
/// run.rng_seed); targets uniform at the average target; region resolution
/// 200, metric sinr, linear spacing, channel 1, tol 1e-9. Scalars broadcast
/// to per-pair vectors and pair x channel matrices.
[[nodiscard]] Scenario parse_scenario(const nlohmann::json& doc);

/// Reads, parses and validates a scenario file. Syntax errors carry line and column.
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& path);

/// Fully expanded document; parse_scenario(to_json(s)) reproduces s.
[[nodiscard]] nlohmann::json to_json(const Scenario& scenario);

/// Materializes the initial state, drawing random powers from run.rng_seed.
[[nodiscard]] SystemState initial_state(const Scenario& scenario);

/// Uniform double in [0, 1) from the top 53 bits of one 64-bit draw.
[[nodiscard]] Real unit_uniform(std::uint64_t bits);

}  // namespace mcpc
