#pragma once

// Independent reference computations used only by the tests.

#include "mcpc/core_model.hpp"
#include "mcpc/region.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using mcpc::Matrix;
using mcpc::Point2;
using mcpc::Real;
using mcpc::Vector;

/// Largest eigenvalue modulus from a dense Hessenberg-QR eigensolver.
inline Real dense_spectral_radius(const Matrix& a) {
    const Eigen::EigenSolver<Matrix> es(a, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// sum_{t=0}^{terms-1} C^t.
inline Matrix neumann_inverse(const Matrix& c, int terms) {
    Matrix sum = Matrix::Identity(c.rows(), c.cols());
    Matrix power = Matrix::Identity(c.rows(), c.cols());
    for (int t = 1; t < terms; ++t) {
        power = power * c;
        sum += power;
    }
    return sum;
}

/// 2x2 closed form: rho([[0, a], [b, 0]]) = sqrt(ab).
inline Real two_by_two_rho(Real a, Real b) { return std::sqrt(a * b); }

/// Symmetric 2-pair FM equilibrium p* = gamma nu / (g (1 - gamma q)).
inline Real symmetric_p_star(Real gamma, Real nu, Real q, Real g = 1.0) {
    return gamma * nu / (g * (1.0 - gamma * q));
}

/// Literal interference sum with raw gains, no normalisation shortcuts.
inline Real raw_sinr(const std::vector<std::vector<Real>>& g, const std::vector<Real>& p,
                     std::size_t i, Real nu) {
    Real interference = nu;
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (j != i) {
            interference += g[j][i] * p[j];
        }
    }
    return g[i][i] * p[i] / interference;
}

inline Real orient(Point2 o, Point2 a, Point2 b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/// O(n^3) hull: a directed pair (i, j) is a hull edge when every other point
/// lies strictly left of it or on the segment between them. Returns the set of
/// vertices (strict corners only).
inline std::set<std::pair<Real, Real>> brute_force_hull(const std::vector<Point2>& pts) {
    std::set<std::pair<Real, Real>> out;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (pts[i].x == pts[j].x && pts[i].y == pts[j].y) {
                continue;
            }
            bool edge = true;
            for (std::size_t k = 0; k < n && edge; ++k) {
                const Real o = orient(pts[i], pts[j], pts[k]);
                if (o < 0.0) {
                    edge = false;
                } else if (o == 0.0) {
                    // Collinear points must lie within the segment.
                    const Real t = (pts[k].x - pts[i].x) * (pts[j].x - pts[i].x) +
                                   (pts[k].y - pts[i].y) * (pts[j].y - pts[i].y);
                    const Real len2 = (pts[j].x - pts[i].x) * (pts[j].x - pts[i].x) +
                                      (pts[j].y - pts[i].y) * (pts[j].y - pts[i].y);
                    edge = t >= 0.0 && t <= len2;
                }
            }
            if (edge) {
                out.insert({pts[i].x, pts[i].y});
                out.insert({pts[j].x, pts[j].y});
            }
        }
    }
    // Drop vertices that sit strictly inside a hull edge (collinear).
    std::vector<std::pair<Real, Real>> v(out.begin(), out.end());
    std::set<std::pair<Real, Real>> corners;
    for (const auto& c : v) {
        bool interior = false;
        for (const auto& a : v) {
            for (const auto& b : v) {
                if (a == c || b == c || a == b) continue;
                const Point2 pa{a.first, a.second};
                const Point2 pb{b.first, b.second};
                const Point2 pc{c.first, c.second};
                if (orient(pa, pb, pc) == 0.0) {
                    const Real t = (pc.x - pa.x) * (pb.x - pa.x) + (pc.y - pa.y) * (pb.y - pa.y);
                    const Real len2 = (pb.x - pa.x) * (pb.x - pa.x) + (pb.y - pa.y) * (pb.y - pa.y);
                    if (t > 0.0 && t < len2) interior = true;
                }
            }
        }
        if (!interior) corners.insert(c);
    }
    return corners;
}

/// Random gains in (0, 1] with a mt19937_64 stream.
inline Matrix random_gains(std::mt19937_64& rng, int m) {
    std::uniform_real_distribution<Real> u(0.0, 1.0);
    Matrix g(m, m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            g(i, j) = 1.0 - u(rng);  // (0, 1]
        }
    }
    return g;
}

inline mcpc::NetworkSpec symmetric_spec(Real q, std::size_t channels, Real nu = 0.04,
                                        Real gamma = 3.0) {
    mcpc::NetworkSpec s;
    s.pair_count = 2;
    s.channel_count = channels;
    Matrix g(2, 2);
    g << 1.0, q, q, 1.0;
    s.gains.assign(channels, g);
    s.noise = Matrix::Constant(2, static_cast<Eigen::Index>(channels), nu);
    s.avg_targets = Vector::Constant(2, gamma);
    return s;
}

/// Minimal XML well-formedness check: balanced tags, quoted attributes,
/// single root, no stray '<' or '&'.
inline bool well_formed_xml(const std::string& doc, std::string* why = nullptr) {
    auto fail = [why](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    std::vector<std::string> stack;
    std::size_t pos = 0;
    int roots = 0;
    while (pos < doc.size()) {
        const char c = doc[pos];
        if (c == '&') {
            const std::size_t semi = doc.find(';', pos);
            if (semi == std::string::npos) return fail("unterminated entity");
            const std::string ent = doc.substr(pos, semi - pos + 1);
            if (ent != "&amp;" && ent != "&lt;" && ent != "&gt;" && ent != "&quot;" &&
                ent != "&apos;") {
                return fail("unknown entity " + ent);
            }
            pos = semi + 1;
            continue;
        }
        if (c != '<') {
            if (stack.empty() && !std::isspace(static_cast<unsigned char>(c))) {
                return fail("text outside root");
            }
            ++pos;
            continue;
        }
        const std::size_t close = doc.find('>', pos);
        if (close == std::string::npos) return fail("unterminated tag");
        std::string tag = doc.substr(pos + 1, close - pos - 1);
        pos = close + 1;
        if (tag.empty()) return fail("empty tag");
        if (tag[0] == '?' || tag[0] == '!') continue;
        if (tag[0] == '/') {
            const std::string name = tag.substr(1);
            if (stack.empty() || stack.back() != name) return fail("mismatched </" + name + ">");
            stack.pop_back();
            continue;
        }
        const bool self_closing = tag.back() == '/';
        if (self_closing) tag.pop_back();
        const std::size_t name_end = tag.find_first_of(" \t\n");
        const std::string name = tag.substr(0, name_end);
        if (name.empty()) return fail("nameless tag");
        // Attributes: name="value" pairs.
        std::size_t a = name_end == std::string::npos ? tag.size() : name_end;
        while (a < tag.size()) {
            while (a < tag.size() && std::isspace(static_cast<unsigned char>(tag[a]))) ++a;
            if (a >= tag.size()) break;
            const std::size_t eq = tag.find('=', a);
            if (eq == std::string::npos || eq + 1 >= tag.size() || tag[eq + 1] != '"') {
                return fail("bad attribute in <" + name + ">");
            }
            const std::size_t end = tag.find('"', eq + 2);
            if (end == std::string::npos) return fail("unterminated attribute");
            if (tag.substr(eq + 2, end - eq - 2).find('<') != std::string::npos) {
                return fail("'<' in attribute");
            }
            a = end + 1;
        }
        if (stack.empty()) ++roots;
        if (!self_closing) stack.push_back(name);
    }
    if (!stack.empty()) return fail("unclosed <" + stack.back() + ">");
    if (roots != 1) return fail("expected exactly one root element");
    return true;
}

}  // namespace oracle
