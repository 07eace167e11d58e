#pragma once

#include "mcpc/dynamics.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mcpc {

/// Header echoed as '# key: value' lines before the CSV column row.
struct TraceHeader {
    std::string tool = kToolVersion;
    std::optional<std::uint64_t> seed;
    std::string mode;
    std::string scenario_json;  // compact scenario echo
    std::vector<std::string> absent;  // columns written as 0 in this mode
};

/// Parsed trace file.
///
/// Column order: time; per pair i, channel k: p_i_k, x_i_k, sinr_i_k, w_i_k;
/// per pair: theta_i; U; per channel: rho_k. Indices are 1-based.
struct TraceData {
    std::map<std::string, std::string> header;
    std::vector<std::string> columns;
    std::vector<std::vector<Real>> rows;
    std::size_t pair_count = 0;
    std::size_t channel_count = 0;

    /// Index of a named column; throws InputError when absent.
    [[nodiscard]] std::size_t column(const std::string& name) const;
};

[[nodiscard]] std::vector<std::string> trace_columns(std::size_t pairs, std::size_t channels);

/// Shortest text that parses back to exactly v.
[[nodiscard]] std::string format_number(Real v);

[[nodiscard]] std::string render_trace(const Trajectory& trajectory, const TraceHeader& header);

/// Writes via a temporary file and rename. Throws IoError with the path.
void write_text_atomic(const std::filesystem::path& path, const std::string& contents);

void write_trace(const Trajectory& trajectory, const TraceHeader& header,
                 const std::filesystem::path& path);

/// Throws InputError on malformed content, IoError when unreadable.
[[nodiscard]] TraceData read_trace(const std::filesystem::path& path);

[[nodiscard]] TraceData parse_trace(const std::string& contents);

}  // namespace mcpc
