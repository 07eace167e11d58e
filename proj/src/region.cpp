#include "mcpc/region.hpp"

#include "mcpc/feasibility.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace mcpc {

namespace {

constexpr Real kWeightFloor = 1e-12;
constexpr double kMaxGridPoints = 1e7;

Real cross(Point2 o, Point2 a, Point2 b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

Point2 to_point(const Vector& v) { return Point2{v(0), v(1)}; }

Real segment_distance(Point2 p, Point2 a, Point2 b) {
    const Real dx = b.x - a.x;
    const Real dy = b.y - a.y;
    const Real len2 = dx * dx + dy * dy;
    Real t = 0.0;
    if (len2 > 0.0) {
        t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
    }
    return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

bool in_triangle(Point2 p, Point2 a, Point2 b, Point2 c, Real tol) {
    const Real d1 = cross(a, b, p);
    const Real d2 = cross(b, c, p);
    const Real d3 = cross(c, a, p);
    const bool has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    const bool has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    if (!(has_neg && has_pos)) {
        return true;
    }
    return std::min({segment_distance(p, a, b), segment_distance(p, b, c),
                     segment_distance(p, c, a)}) <= tol;
}

std::vector<Real> make_axis(const SweepOptions& o) {
    std::vector<Real> axis(static_cast<std::size_t>(o.resolution));
    const auto last = static_cast<std::size_t>(o.resolution - 1);
    if (o.spacing == Spacing::linear) {
        for (std::size_t a = 0; a <= last; ++a) {
            axis[a] = o.p_max * static_cast<Real>(a) / static_cast<Real>(last);
        }
    } else {
        axis[0] = 0.0;
        const Real lo = std::log(o.log_floor * o.p_max);
        const Real hi = std::log(o.p_max);
        const std::size_t span = last > 1 ? last - 1 : 1;
        for (std::size_t a = 1; a <= last; ++a) {
            axis[a] = std::exp(lo + (hi - lo) * static_cast<Real>(a - 1) / static_cast<Real>(span));
        }
        axis[last] = o.p_max;
    }
    return axis;
}

// Corners of mapped cell (a, b) in counterclockwise power order.
std::array<Point2, 4> cell_corners(const RegionResult& r, std::size_t a, std::size_t b) {
    const auto n = static_cast<std::size_t>(r.grid_resolution);
    auto at = [&](std::size_t i0, std::size_t i1) { return to_point(r.samples[i0 + n * i1].point); };
    return {at(a, b), at(a + 1, b), at(a + 1, b + 1), at(a, b + 1)};
}

Vector metric_to_sinr(const Vector& target, Metric metric) {
    if (metric == Metric::sinr) {
        return target;
    }
    return target.unaryExpr([](Real r) { return std::exp2(r) - 1.0; });
}

// Exact power vector attaining an SINR point on channel k, if it lies in the box.
std::optional<Vector> exact_preimage(const NetworkSpec& spec, std::size_t k, const Vector& sinr,
                                     Real p_max) {
    if ((sinr.array() < 0.0).any()) {
        return std::nullopt;
    }
    try {
        const EquilibriumSolution eq = equilibrium_powers(spec, sinr, k);
        const Real slack = 1e-12 * p_max;
        if ((eq.p_star.array() < -slack).any() || (eq.p_star.array() > p_max + slack).any()) {
            return std::nullopt;
        }
        return eq.p_star.cwiseMax(0.0).cwiseMin(p_max);
    } catch (const InfeasibleError&) {
        return std::nullopt;
    } catch (const NumericalError&) {
        return std::nullopt;
    }
}

void require_planar(const RegionResult& region, const char* what) {
    if (region.pair_count() != 2 || region.hull.empty()) {
        throw InputError(std::string(what) + ": requires a two-pair region with a hull");
    }
}

}  // namespace

std::string to_string(Metric metric) { return metric == Metric::sinr ? "sinr" : "rate"; }

Metric parse_metric(const std::string& text) {
    if (text == "sinr") return Metric::sinr;
    if (text == "rate") return Metric::rate;
    throw InputError("unknown metric '" + text + "' (expected sinr or rate)");
}

std::string to_string(Spacing spacing) { return spacing == Spacing::linear ? "linear" : "log"; }

Spacing parse_spacing(const std::string& text) {
    if (text == "linear") return Spacing::linear;
    if (text == "log") return Spacing::log;
    throw InputError("unknown spacing '" + text + "' (expected linear or log)");
}

std::string to_string(RegionClass cls) {
    switch (cls) {
        case RegionClass::K:
            return "K";
        case RegionClass::L:
            return "L";
        case RegionClass::M_out:
            return "M";
    }
    return "unknown";
}

Real RegionResult::area_gap() const {
    return hull_area > 0.0 ? (hull_area - psi_area) / hull_area : 0.0;
}

Vector metric_point(const NetworkSpec& spec, std::size_t k, const Vector& powers, Metric metric) {
    const Vector w = effective_interference_column(spec, powers, k);
    Vector out = powers.cwiseQuotient(w);
    if (metric == Metric::rate) {
        out = out.unaryExpr([](Real g) { return shannon_rate(g); });
    }
    return out;
}

RegionResult sweep(const NetworkSpec& spec, std::size_t k, const SweepOptions& options) {
    spec.validate();
    if (k >= spec.channel_count) {
        throw InputError("region.channel: out of range");
    }
    if (options.resolution < 2) {
        throw InputError("region.resolution: must be at least 2");
    }
    if (!(options.p_max > 0.0) || !std::isfinite(options.p_max)) {
        throw InputError("region.p_max: must be positive");
    }
    if (options.spacing == Spacing::log && !(options.log_floor > 0.0 && options.log_floor < 1.0)) {
        throw InputError("region.log_floor: must lie in (0, 1)");
    }
    const std::size_t m = spec.pair_count;
    if (std::pow(static_cast<double>(options.resolution), static_cast<double>(m)) > kMaxGridPoints) {
        throw InputError("region.resolution: grid too large for this many pairs");
    }

    RegionResult r;
    r.metric = options.metric;
    r.spacing = options.spacing;
    r.channel = k;
    r.grid_resolution = options.resolution;
    r.p_max = options.p_max;
    r.axis = make_axis(options);

    const auto res = static_cast<std::size_t>(options.resolution);
    std::size_t total = 1;
    for (std::size_t i = 0; i < m; ++i) {
        total *= res;
    }
    r.samples.reserve(total);
    Vector powers(static_cast<Eigen::Index>(m));
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rest = flat;
        for (std::size_t i = 0; i < m; ++i) {
            powers(static_cast<Eigen::Index>(i)) = r.axis[rest % res];
            rest /= res;
        }
        r.samples.push_back(RegionSample{metric_point(spec, k, powers, options.metric), powers});
    }

    if (m != 2) {
        return r;
    }
    std::vector<Point2> cloud;
    cloud.reserve(total);
    for (const RegionSample& s : r.samples) {
        cloud.push_back(to_point(s.point));
    }
    r.hull_indices = convex_hull_indices(cloud);
    for (std::size_t idx : r.hull_indices) {
        r.hull.push_back(cloud[idx]);
    }
    r.hull_area = polygon_area(r.hull);
    for (std::size_t b = 0; b + 1 < res; ++b) {
        for (std::size_t a = 0; a + 1 < res; ++a) {
            const std::array<Point2, 4> q = cell_corners(r, a, b);
            r.psi_area += polygon_area({q.begin(), q.end()});
            for (std::size_t u = 0; u < 4; ++u) {
                for (std::size_t v = u + 1; v < 4; ++v) {
                    r.error_bound = std::max(
                        {r.error_bound, std::abs(q[u].x - q[v].x), std::abs(q[u].y - q[v].y)});
                }
            }
        }
    }
    return r;
}

std::vector<std::size_t> convex_hull_indices(const std::vector<Point2>& points) {
    if (points.empty()) {
        throw InputError("convex_hull: empty input");
    }
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Point2& p = points[a];
        const Point2& q = points[b];
        return p.y < q.y || (p.y == q.y && (p.x < q.x || (p.x == q.x && a < b)));
    });
    // Drop exact duplicates so degenerate inputs collapse cleanly.
    order.erase(std::unique(order.begin(), order.end(),
                            [&](std::size_t a, std::size_t b) {
                                return points[a].x == points[b].x && points[a].y == points[b].y;
                            }),
                order.end());
    if (order.size() < 3) {
        return order;
    }
    // Sorted by (y, x): the lower chain runs along the bottom, left to right.
    std::vector<std::size_t> hull(2 * order.size());
    std::size_t h = 0;
    for (std::size_t idx : order) {
        while (h >= 2 && cross(points[hull[h - 2]], points[hull[h - 1]], points[idx]) <= 0.0) {
            --h;
        }
        hull[h++] = idx;
    }
    const std::size_t lower = h + 1;
    for (std::size_t t = order.size() - 1; t-- > 0;) {
        const std::size_t idx = order[t];
        while (h >= lower && cross(points[hull[h - 2]], points[hull[h - 1]], points[idx]) <= 0.0) {
            --h;
        }
        hull[h++] = idx;
    }
    hull.resize(h - 1);
    return hull;
}

std::vector<Point2> convex_hull(const std::vector<Point2>& points) {
    std::vector<Point2> out;
    for (std::size_t idx : convex_hull_indices(points)) {
        out.push_back(points[idx]);
    }
    return out;
}

Real polygon_area(const std::vector<Point2>& polygon) {
    Real twice = 0.0;
    for (std::size_t a = 0; a < polygon.size(); ++a) {
        const Point2& p = polygon[a];
        const Point2& q = polygon[(a + 1) % polygon.size()];
        twice += p.x * q.y - q.x * p.y;
    }
    return 0.5 * twice;
}

bool point_in_convex_polygon(const std::vector<Point2>& polygon, Point2 p, Real slack) {
    const std::size_t n = polygon.size();
    if (n == 0) {
        return false;
    }
    if (n == 1) {
        return std::hypot(p.x - polygon[0].x, p.y - polygon[0].y) <= slack;
    }
    if (n == 2) {
        return segment_distance(p, polygon[0], polygon[1]) <= slack;
    }
    bool inside = true;
    for (std::size_t a = 0; a < n && inside; ++a) {
        inside = cross(polygon[a], polygon[(a + 1) % n], p) >= 0.0;
    }
    if (inside) {
        return true;
    }
    for (std::size_t a = 0; a < n; ++a) {
        if (segment_distance(p, polygon[a], polygon[(a + 1) % n]) <= slack) {
            return true;
        }
    }
    return false;
}

bool in_sampled_region(const RegionResult& region, Point2 p, Real tol) {
    require_planar(region, "in_sampled_region");
    const auto res = static_cast<std::size_t>(region.grid_resolution);
    for (std::size_t b = 0; b + 1 < res; ++b) {
        for (std::size_t a = 0; a + 1 < res; ++a) {
            const std::array<Point2, 4> q = cell_corners(region, a, b);
            const Real lo_x = std::min({q[0].x, q[1].x, q[2].x, q[3].x}) - tol;
            const Real hi_x = std::max({q[0].x, q[1].x, q[2].x, q[3].x}) + tol;
            const Real lo_y = std::min({q[0].y, q[1].y, q[2].y, q[3].y}) - tol;
            const Real hi_y = std::max({q[0].y, q[1].y, q[2].y, q[3].y}) + tol;
            if (p.x < lo_x || p.x > hi_x || p.y < lo_y || p.y > hi_y) {
                continue;
            }
            if (in_triangle(p, q[0], q[1], q[2], tol) || in_triangle(p, q[0], q[2], q[3], tol)) {
                return true;
            }
        }
    }
    return false;
}

RegionClass classify(const Vector& target, const RegionResult& region, Real tol) {
    require_planar(region, "classify");
    if (target.size() != 2) {
        throw InputError("classify: target must have two coordinates");
    }
    const Point2 p = to_point(target);
    if (in_sampled_region(region, p, tol)) {
        return RegionClass::K;
    }
    if (!point_in_convex_polygon(region.hull, p, tol)) {
        return RegionClass::M_out;
    }
    return RegionClass::L;
}

Decomposition decompose(const NetworkSpec& spec, const Vector& target, const RegionResult& region,
                        Real tol) {
    Decomposition out;
    out.cls = classify(target, region, tol);
    out.target = target;
    out.error_bound = region.error_bound + tol;
    if (out.cls == RegionClass::M_out) {
        throw InfeasibleError("decompose: target lies outside the convex hull of the region");
    }

    if (out.cls == RegionClass::K) {
        RegionSample chosen;
        const std::optional<Vector> exact =
            exact_preimage(spec, region.channel, metric_to_sinr(target, region.metric), region.p_max);
        if (exact) {
            chosen = RegionSample{metric_point(spec, region.channel, *exact, region.metric), *exact};
        } else {
            Real best = std::numeric_limits<Real>::infinity();
            for (const RegionSample& s : region.samples) {
                const Real d = (s.point - target).cwiseAbs().maxCoeff();
                if (d < best) {
                    best = d;
                    chosen = s;
                }
            }
        }
        out.points = {chosen};
        out.weights = {1.0};
        out.achieved = chosen.point;
        out.error = (out.achieved - target).cwiseAbs().maxCoeff();
        return out;
    }

    // Fan triangulation of the sample hull from its first vertex; pick the
    // triangle whose worst barycentric coordinate is largest.
    const std::vector<std::size_t>& hv = region.hull_indices;
    const Point2 p = to_point(target);
    std::array<std::size_t, 3> best_tri{hv[0], hv[0], hv[0]};
    std::array<Real, 3> best_w{1.0, 0.0, 0.0};
    Real best_score = -std::numeric_limits<Real>::infinity();
    auto consider = [&](std::size_t ia, std::size_t ib, std::size_t ic) {
        const Point2 a = to_point(region.samples[ia].point);
        const Point2 b = to_point(region.samples[ib].point);
        const Point2 c = to_point(region.samples[ic].point);
        const Real det = cross(a, b, c);
        if (!(std::abs(det) > 0.0)) {
            return;
        }
        const std::array<Real, 3> w{cross(p, b, c) / det, cross(a, p, c) / det,
                                    cross(a, b, p) / det};
        const Real score = std::min({w[0], w[1], w[2]});
        if (score > best_score) {
            best_score = score;
            best_tri = {ia, ib, ic};
            best_w = w;
        }
    };
    if (hv.size() >= 3) {
        for (std::size_t j = 1; j + 1 < hv.size(); ++j) {
            consider(hv[0], hv[j], hv[j + 1]);
        }
    }
    if (best_score == -std::numeric_limits<Real>::infinity()) {
        // Degenerate hull: project onto the segment.
        const Point2 a = to_point(region.samples[hv.front()].point);
        const Point2 b = to_point(region.samples[hv.back()].point);
        const Real dx = b.x - a.x;
        const Real dy = b.y - a.y;
        const Real len2 = dx * dx + dy * dy;
        const Real t =
            len2 > 0.0 ? std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0) : 0.0;
        best_tri = {hv.front(), hv.back(), hv.back()};
        best_w = {1.0 - t, t, 0.0};
    }

    Real total = 0.0;
    for (Real& w : best_w) {
        w = w < kWeightFloor ? 0.0 : w;
        total += w;
    }
    out.achieved = Vector::Zero(target.size());
    for (std::size_t v = 0; v < 3; ++v) {
        if (best_w[v] == 0.0) {
            continue;
        }
        const Real w = best_w[v] / total;
        out.points.push_back(region.samples[best_tri[v]]);
        out.weights.push_back(w);
    }
    for (std::size_t v = 0; v < out.points.size(); ++v) {
        out.achieved += out.weights[v] * out.points[v].point;
    }
    out.error = (out.achieved - target).cwiseAbs().maxCoeff();
    return out;
}

}  // namespace mcpc
