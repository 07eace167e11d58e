#pragma once

#include "mcpc/dynamics.hpp"
#include "mcpc/feasibility.hpp"
#include "mcpc/region.hpp"
#include "mcpc/scenario.hpp"

#include "json.hpp"

#include <filesystem>

namespace mcpc {

inline constexpr int kReportSchema = 1;

struct ChannelFeasibility {
    std::size_t channel = 0;
    FeasibilityResult feasibility;
    std::optional<EquilibriumSolution> equilibrium;
    std::optional<LyapunovCertificate> certificate;
    std::vector<std::string> diagnostics;
};

struct FeasibilityReport {
    Matrix targets;
    std::vector<ChannelFeasibility> channels;
    AllotmentReport allotment;
    bool all_channels_feasible = false;
};

/// Per-channel rho, p*, and diagonal certificate for the given allotment.
[[nodiscard]] FeasibilityReport analyze_feasibility(const NetworkSpec& spec, const Matrix& targets,
                                                    const Vector& k_gains);

[[nodiscard]] nlohmann::json to_json(const FeasibilityReport& report);
[[nodiscard]] nlohmann::json simulation_report(const Scenario& scenario,
                                               const Trajectory& trajectory);
[[nodiscard]] nlohmann::json region_report(const RegionResult& region,
                                           const std::vector<Vector>& targets,
                                           const std::vector<RegionClass>& classes);
[[nodiscard]] nlohmann::json to_json(const Decomposition& d, Metric metric);

/// Pretty-printed with two-space indent, trailing newline, written atomically.
void write_report(const nlohmann::json& report, const std::filesystem::path& path);

}  // namespace mcpc
