#pragma once

#include "mcpc/core_model.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace mcpc {

enum class Metric { sinr, rate };
enum class Spacing { linear, log };
enum class RegionClass { K, L, M_out };

[[nodiscard]] std::string to_string(Metric metric);
[[nodiscard]] Metric parse_metric(const std::string& text);
[[nodiscard]] std::string to_string(Spacing spacing);
[[nodiscard]] Spacing parse_spacing(const std::string& text);
[[nodiscard]] std::string to_string(RegionClass cls);

struct RegionSample {
    Vector point;   // metric value per pair
    Vector powers;  // generating power vector
};

struct SweepOptions {
    int resolution = 200;  // grid points per power axis, endpoints included
    Metric metric = Metric::sinr;
    Spacing spacing = Spacing::linear;
    Real p_max = 1e6;
    /// Log spacing covers {0} and [log_floor * p_max, p_max] geometrically.
    Real log_floor = 1e-6;
};

/// Sampled achievable set on one channel with its convex hull.
///
/// samples are stored in grid order, pair 0 varying fastest. For two pairs the
/// power-to-metric map is injective and orientation preserving, so the images
/// of the grid cells tile the achievable set; psi_area is the sum of their
/// areas and error_bound the largest max-norm diameter of a mapped cell.
struct RegionResult {
    Metric metric = Metric::sinr;
    Spacing spacing = Spacing::linear;
    std::size_t channel = 0;
    int grid_resolution = 0;
    Real p_max = 0.0;
    std::vector<Real> axis;
    std::vector<RegionSample> samples;
    std::vector<std::size_t> hull_indices;  // into samples, counterclockwise
    std::vector<Point2> hull;
    Real psi_area = 0.0;
    Real hull_area = 0.0;
    Real error_bound = 0.0;

    [[nodiscard]] std::size_t pair_count() const {
        return samples.empty() ? 0 : static_cast<std::size_t>(samples.front().point.size());
    }
    /// (hull_area - psi_area) / hull_area; 0 for an empty hull.
    [[nodiscard]] Real area_gap() const;
};

struct Decomposition {
    RegionClass cls = RegionClass::K;
    std::vector<RegionSample> points;  // at most pairs + 1
    std::vector<Real> weights;
    Vector target;
    Vector achieved;
    Real error = 0.0;        // max-norm distance of achieved from target
    Real error_bound = 0.0;  // grid-induced bound on error
};

/// Metric point of a power vector on channel k.
[[nodiscard]] Vector metric_point(const NetworkSpec& spec, std::size_t k, const Vector& powers,
                                  Metric metric);

/// Grid sweep of [0, p_max]^M. Hull and areas are only computed for M = 2.
/// Throws InputError for resolution < 2 or more than 1e7 grid points.
[[nodiscard]] RegionResult sweep(const NetworkSpec& spec, std::size_t k,
                                 const SweepOptions& options);

/// Monotone chain. Counterclockwise, collinear boundary points dropped, first
/// vertex lowest-leftmost. Returns indices into points.
[[nodiscard]] std::vector<std::size_t> convex_hull_indices(const std::vector<Point2>& points);

[[nodiscard]] std::vector<Point2> convex_hull(const std::vector<Point2>& points);

/// Shoelace area, positive for counterclockwise order.
[[nodiscard]] Real polygon_area(const std::vector<Point2>& polygon);

/// Inside or within slack of a convex counterclockwise polygon (any size >= 1).
[[nodiscard]] bool point_in_convex_polygon(const std::vector<Point2>& polygon, Point2 p,
                                           Real slack);

/// Within tol of some mapped grid cell.
[[nodiscard]] bool in_sampled_region(const RegionResult& region, Point2 p, Real tol);

/// K inside the sampled region, M_out farther than tol outside the hull, L otherwise.
/// Requires a two-pair region.
[[nodiscard]] RegionClass classify(const Vector& target, const RegionResult& region, Real tol);

/// Time-sharing decomposition of a K or L target into at most three achievable points.
/// K targets use the exact power preimage when it lies in the power box. Throws
/// InfeasibleError for M_out targets.
[[nodiscard]] Decomposition decompose(const NetworkSpec& spec, const Vector& target,
                                      const RegionResult& region, Real tol);

}  // namespace mcpc
