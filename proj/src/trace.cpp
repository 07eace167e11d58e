#include "mcpc/trace.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace mcpc {

namespace {

std::string idx(std::size_t a) { return std::to_string(a + 1); }

void append_row(std::string& out, const TrajectorySample& s, bool utility_present) {
    const auto m = s.state.powers.rows();
    const auto n = s.state.powers.cols();
    out += format_number(s.state.time);
    auto put = [&out](Real v) {
        out += ',';
        out += format_number(v);
    };
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) {
            put(s.state.powers(i, k));
            put(s.state.targets(i, k));
            put(s.metrics.sinr(i, k));
            put(s.metrics.effective_interference(i, k));
        }
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        put(s.metrics.avg_target_gap(i));
    }
    put(utility_present ? s.monitor.utility : 0.0);
    for (Eigen::Index k = 0; k < n; ++k) {
        put(s.monitor.rho_per_channel(k));
    }
    out += '\n';
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == sep) {
        out.emplace_back();
    }
    return out;
}

}  // namespace

std::size_t TraceData::column(const std::string& name) const {
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c] == name) {
            return c;
        }
    }
    throw InputError("trace: no column named '" + name + "'");
}

std::vector<std::string> trace_columns(std::size_t pairs, std::size_t channels) {
    std::vector<std::string> cols{"time"};
    for (std::size_t i = 0; i < pairs; ++i) {
        for (std::size_t k = 0; k < channels; ++k) {
            const std::string suffix = "_" + idx(i) + "_" + idx(k);
            for (const char* q : {"p", "x", "sinr", "w"}) {
                cols.push_back(q + suffix);
            }
        }
    }
    for (std::size_t i = 0; i < pairs; ++i) {
        cols.push_back("theta_" + idx(i));
    }
    cols.emplace_back("U");
    for (std::size_t k = 0; k < channels; ++k) {
        cols.push_back("rho_" + idx(k));
    }
    return cols;
}

std::string format_number(Real v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::string render_trace(const Trajectory& trajectory, const TraceHeader& header) {
    if (trajectory.samples.empty()) {
        throw InputError("trace: trajectory has no samples");
    }
    const TrajectorySample& first = trajectory.samples.front();
    const auto pairs = static_cast<std::size_t>(first.state.powers.rows());
    const auto channels = static_cast<std::size_t>(first.state.powers.cols());
    bool utility_present = true;
    std::string absent;
    for (const std::string& a : header.absent) {
        utility_present = utility_present && a != "U";
        absent += (absent.empty() ? "" : ",") + a;
    }

    std::string out;
    out += "# tool: " + header.tool + "\n";
    out += "# seed: " + (header.seed ? std::to_string(*header.seed) : std::string("none")) + "\n";
    out += "# mode: " + header.mode + "\n";
    out += "# absent: " + (absent.empty() ? std::string("none") : absent) + "\n";
    out += "# scenario: " + header.scenario_json + "\n";
    const std::vector<std::string> cols = trace_columns(pairs, channels);
    for (std::size_t c = 0; c < cols.size(); ++c) {
        out += (c == 0 ? "" : ",") + cols[c];
    }
    out += '\n';
    for (const TrajectorySample& s : trajectory.samples) {
        append_row(out, s, utility_present);
    }
    return out;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError(path.parent_path().string() + ": " + ec.message());
        }
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError(tmp.string() + ": cannot open for writing");
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            throw IoError(tmp.string() + ": write failed");
        }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError(path.string() + ": cannot replace file");
    }
}

void write_trace(const Trajectory& trajectory, const TraceHeader& header,
                 const std::filesystem::path& path) {
    write_text_atomic(path, render_trace(trajectory, header));
}

TraceData parse_trace(const std::string& contents) {
    TraceData data;
    std::istringstream in(contents);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            const auto colon = line.find(':');
            if (colon != std::string::npos) {
                const std::string key = line.substr(2, colon - 2);
                const std::string value = colon + 2 <= line.size() ? line.substr(colon + 2) : "";
                data.header[key] = value;
            }
            continue;
        }
        if (data.columns.empty()) {
            data.columns = split(line, ',');
            if (data.columns.empty() || data.columns.front() != "time") {
                throw InputError("trace line " + std::to_string(line_no) +
                                 ": expected the column row starting with 'time'");
            }
            continue;
        }
        const std::vector<std::string> cells = split(line, ',');
        if (cells.size() != data.columns.size()) {
            throw InputError("trace line " + std::to_string(line_no) + ": expected " +
                             std::to_string(data.columns.size()) + " fields, got " +
                             std::to_string(cells.size()));
        }
        std::vector<Real> row(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const char* b = cells[c].data();
            const char* e = b + cells[c].size();
            const auto res = std::from_chars(b, e, row[c]);
            if (res.ec != std::errc() || res.ptr != e) {
                throw InputError("trace line " + std::to_string(line_no) + ": bad number '" +
                                 cells[c] + "' in column " + data.columns[c]);
            }
        }
        data.rows.push_back(std::move(row));
    }
    if (data.columns.empty()) {
        throw InputError("trace: missing column row");
    }
    std::size_t pairs = 0;
    std::size_t channels = 0;
    for (const std::string& c : data.columns) {
        if (c.rfind("theta_", 0) == 0) ++pairs;
        if (c.rfind("rho_", 0) == 0) ++channels;
    }
    if (pairs == 0 || channels == 0 || data.columns != trace_columns(pairs, channels)) {
        throw InputError("trace: column row does not follow the trace schema");
    }
    data.pair_count = pairs;
    data.channel_count = channels;
    return data;
}

TraceData read_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(path.string() + ": cannot open trace");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_trace(buf.str());
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

}  // namespace mcpc
