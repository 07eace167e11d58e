#pragma once

#include "mcpc/region.hpp"
#include "mcpc/trace.hpp"

#include <string>
#include <vector>

namespace mcpc {

struct PlotStyle {
    int panel_width = 360;
    int panel_height = 220;
    /// Trace series, one row of panels each: any of "p", "x", "sinr", "w".
    std::vector<std::string> series{"p", "x", "sinr"};
    std::size_t max_points_per_line = 2000;
    std::size_t max_cloud_points = 4000;
};

/// One panel per (series, channel) with a line per pair. Throws InputError on a 0-row trace.
[[nodiscard]] std::string render_trace_svg(const TraceData& trace, const PlotStyle& style = {});

/// Thinned cloud, hull outline and class-coloured target markers. Throws on an empty region.
[[nodiscard]] std::string render_region_svg(const RegionResult& region,
                                            const std::vector<Vector>& targets,
                                            const std::vector<RegionClass>& classes,
                                            const PlotStyle& style = {});

}  // namespace mcpc
