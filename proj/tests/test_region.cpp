#include "catch_amalgamated.hpp"

#include "mcpc/feasibility.hpp"
#include "mcpc/region.hpp"
#include "oracles.hpp"

#include <random>
#include <set>

using namespace mcpc;
using Catch::Approx;

namespace {

RegionResult sinr_region(Real q, int resolution, Real p_max = 1.0,
                         Metric metric = Metric::sinr) {
    SweepOptions o;
    o.resolution = resolution;
    o.p_max = p_max;
    o.metric = metric;
    return sweep(oracle::symmetric_spec(q, 1), 0, o);
}

std::set<std::pair<Real, Real>> as_set(const std::vector<Point2>& pts) {
    std::set<std::pair<Real, Real>> out;
    for (const Point2& p : pts) out.insert({p.x, p.y});
    return out;
}

}  // namespace

TEST_CASE("hull of a square with interior points", "[region]") {
    std::vector<Point2> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0.2, 0.7}, {0.5, 0}};
    const std::vector<Point2> h = convex_hull(pts);
    REQUIRE(h.size() == 4);
    CHECK(polygon_area(h) == Approx(1.0));  // counterclockwise
    CHECK(as_set(h) == std::set<std::pair<Real, Real>>{{0, 0}, {1, 0}, {1, 1}, {0, 1}});
}

TEST_CASE("degenerate hulls", "[region]") {
    CHECK(convex_hull({{2, 3}, {2, 3}, {2, 3}}).size() == 1);
    const std::vector<Point2> seg = convex_hull({{0, 0}, {1, 1}, {2, 2}, {0.5, 0.5}});
    REQUIRE(seg.size() == 2);
    CHECK(as_set(seg) == std::set<std::pair<Real, Real>>{{0, 0}, {2, 2}});
    CHECK_THROWS_AS(convex_hull({}), InputError);
}

TEST_CASE("hull matches the brute-force oracle on random clouds", "[region][property]") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<Real> u(-10.0, 10.0);
    std::uniform_int_distribution<int> grid(-5, 5);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<Point2> pts;
        const int n = 5 + trial * 2;
        for (int i = 0; i < n; ++i) {
            // Half of the clouds are on an integer lattice, forcing collinear ties.
            if (trial % 2 == 0) {
                pts.push_back({u(rng), u(rng)});
            } else {
                pts.push_back({static_cast<Real>(grid(rng)), static_cast<Real>(grid(rng))});
            }
        }
        const std::vector<Point2> h = convex_hull(pts);
        CHECK(as_set(h) == oracle::brute_force_hull(pts));
        CHECK(polygon_area(h) >= 0.0);
        for (std::size_t a = 0; a < h.size() && h.size() >= 3; ++a) {
            CHECK(oracle::orient(h[a], h[(a + 1) % h.size()], h[(a + 2) % h.size()]) > 0.0);
        }
        for (const Point2& p : pts) {
            CHECK(point_in_convex_polygon(h, p, 1e-9));
        }
    }
}

TEST_CASE("single-pair sweep spans zero to the maximum sinr", "[region]") {
    NetworkSpec s;
    s.pair_count = 1;
    s.channel_count = 1;
    s.gains = {Matrix::Constant(1, 1, 0.5)};
    s.noise = Matrix::Constant(1, 1, 0.04);
    s.avg_targets = Vector::Constant(1, 3.0);
    SweepOptions o;
    o.resolution = 11;
    o.p_max = 2.0;
    const RegionResult r = sweep(s, 0, o);
    REQUIRE(r.samples.size() == 11);
    CHECK(r.samples.front().point(0) == 0.0);
    CHECK(r.samples.back().point(0) == Approx(0.5 * 2.0 / 0.04));
    CHECK(r.hull.empty());
}

TEST_CASE("sweep rejects a degenerate grid", "[region]") {
    SweepOptions o;
    o.resolution = 1;
    CHECK_THROWS_AS(sweep(oracle::symmetric_spec(0.1, 1), 0, o), InputError);
}

TEST_CASE("sweep invariants", "[region]") {
    const RegionResult r = sinr_region(0.2, 40);
    CHECK(r.samples.size() == 1600);
    CHECK(r.samples.front().point.cwiseAbs().maxCoeff() == 0.0);  // origin power -> origin
    for (const RegionSample& s : r.samples) {
        CHECK(point_in_convex_polygon(r.hull, {s.point(0), s.point(1)}, 1e-9));
    }
    CHECK(r.hull_area >= r.psi_area);
    CHECK(r.psi_area > 0.0);
    // Counterclockwise hull.
    CHECK(polygon_area(r.hull) > 0.0);

    const RegionResult rate = sinr_region(0.2, 40, 1.0, Metric::rate);
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
        for (int c = 0; c < 2; ++c) {
            CHECK(rate.samples[i].point(c) == Approx(std::log2(1.0 + r.samples[i].point(c))));
        }
    }
}

TEST_CASE("log spacing covers zero and the cap", "[region]") {
    SweepOptions o;
    o.resolution = 30;
    o.p_max = 1e6;
    o.spacing = Spacing::log;
    const RegionResult r = sweep(oracle::symmetric_spec(0.01, 1), 0, o);
    CHECK(r.axis.front() == 0.0);
    CHECK(r.axis.back() == 1e6);
    CHECK(r.axis[1] == Approx(1.0));
    for (std::size_t a = 1; a < r.axis.size(); ++a) {
        CHECK(r.axis[a] > r.axis[a - 1]);
    }
}

TEST_CASE("weak coupling is effectively convex, strong coupling is not", "[region]") {
    const RegionResult weak = sinr_region(0.01, 200);
    CHECK(weak.area_gap() < 0.02);
    const RegionResult strong = sinr_region(0.4, 200);
    CHECK(strong.hull_area > 1.05 * strong.psi_area);
}

TEST_CASE("refinement never shrinks the sampled area by more than a cell row", "[region][property]") {
    for (Real q : {0.01, 0.1, 0.4}) {
        const RegionResult coarse = sinr_region(q, 50);
        const RegionResult fine = sinr_region(q, 100);
        // One row of coarse cells spans at most the region width times the cell height.
        const Real width = coarse.hull_area > 0 ? coarse.samples.back().point.maxCoeff() : 0.0;
        const Real row = width * coarse.error_bound;
        CHECK(fine.psi_area >= coarse.psi_area - row);
    }
}

TEST_CASE("classification", "[region]") {
    const RegionResult strong = sinr_region(0.4, 200);
    Vector t(2);
    t << 0.0, 0.0;
    CHECK(classify(t, strong, 1e-9) == RegionClass::K);
    t << 26.0, 26.0;  // beyond both maxima (25)
    CHECK(classify(t, strong, 1e-9) == RegionClass::M_out);
    t << 3.0, 3.0;
    CHECK(classify(t, strong, 1e-9) == RegionClass::L);
    t << 1.0, 1.0;
    CHECK(classify(t, strong, 1e-9) == RegionClass::K);
}

TEST_CASE("classification of (3, 3) stays L at fine resolution", "[region]") {
    const RegionResult fine = sinr_region(0.4, 400);
    Vector t(2);
    t << 3.0, 3.0;
    CHECK(classify(t, fine, 1e-9) == RegionClass::L);
}

TEST_CASE("decompose a K target with weight one", "[region]") {
    const NetworkSpec s = oracle::symmetric_spec(0.4, 1);
    const RegionResult r = sinr_region(0.4, 100);
    Vector t(2);
    t << 1.0, 1.5;
    const Decomposition d = decompose(s, t, r, 1e-9);
    CHECK(d.cls == RegionClass::K);
    REQUIRE(d.weights.size() == 1);
    CHECK(d.weights[0] == 1.0);
    CHECK(d.error < 1e-9);
    CHECK((d.points[0].powers.array() <= r.p_max).all());
}

TEST_CASE("decompose the midpoint of two extreme points", "[region]") {
    const NetworkSpec s = oracle::symmetric_spec(0.4, 1);
    const RegionResult r = sinr_region(0.4, 100);
    Vector t(2);
    t << 12.5, 12.5;  // midpoint of (25, 0) and (0, 25)
    const Decomposition d = decompose(s, t, r, 1e-9);
    CHECK(d.cls == RegionClass::L);
    REQUIRE(d.weights.size() == 2);
    CHECK(d.weights[0] == Approx(0.5).epsilon(1e-9));
    CHECK(d.weights[1] == Approx(0.5).epsilon(1e-9));
}

TEST_CASE("decompose then recombine reproduces the reported error", "[region][property]") {
    const NetworkSpec s = oracle::symmetric_spec(0.4, 1);
    const RegionResult r = sinr_region(0.4, 120);
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<Real> u(0.0, 25.0);
    int l_count = 0;
    for (int trial = 0; trial < 200; ++trial) {
        Vector t(2);
        t << u(rng), u(rng);
        const RegionClass cls = classify(t, r, 1e-9);
        if (cls == RegionClass::M_out) {
            CHECK_THROWS_AS(decompose(s, t, r, 1e-9), InfeasibleError);
            continue;
        }
        const Decomposition d = decompose(s, t, r, 1e-9);
        l_count += cls == RegionClass::L;
        CHECK(d.points.size() <= 3);
        Real sum = 0.0;
        Vector combo = Vector::Zero(2);
        for (std::size_t a = 0; a < d.points.size(); ++a) {
            CHECK(d.weights[a] >= 0.0);
            sum += d.weights[a];
            combo += d.weights[a] * d.points[a].point;
            // Every point is achievable: it is the image of its powers.
            const Vector image = metric_point(s, 0, d.points[a].powers, Metric::sinr);
            CHECK((image - d.points[a].point).cwiseAbs().maxCoeff() < 1e-9);
        }
        CHECK(sum == Approx(1.0).margin(1e-9));
        CHECK((combo - d.achieved).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((d.achieved - t).cwiseAbs().maxCoeff() == Approx(d.error).margin(1e-15));
        CHECK(d.error <= d.error_bound);
    }
    CHECK(l_count > 50);
}
