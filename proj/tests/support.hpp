// Test-only helpers: fixtures, random scene generators and the independent
// oracles that the library is checked against.
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "silpose/appearance.hpp"
#include "silpose/filter.hpp"
#include "silpose/geometry.hpp"
#include "silpose/io.hpp"

namespace silpose::testing {

inline std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(SILPOSE_FIXTURE_DIR) / name;
}

/// Fresh, empty scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::path(SILPOSE_SCRATCH_DIR) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline double deg(double radians) { return radians * 180.0 / std::numbers::pi; }
inline double rad(double degrees) { return degrees * std::numbers::pi / 180.0; }

/// Brute-force silhouette: every pixel center against every triangle with a
/// same-side test on the cross products (p - a) x (b - a).
inline std::vector<std::uint8_t> brute_force_mask(const std::vector<Triangle2>& tris, int w, int h) {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(w) * h, 0);
    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
            const double px = i + 0.5, py = j + 0.5;
            for (const auto& t : tris) {
                const double area = (t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) -
                                    (t[1][1] - t[0][1]) * (t[2][0] - t[0][0]);
                if (area == 0.0 || !std::isfinite(area)) continue;
                int pos = 0, neg = 0;
                for (int k = 0; k < 3; ++k) {
                    const auto& a = t[k];
                    const auto& b = t[(k + 1) % 3];
                    const double cross = (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0]);
                    pos += cross > 0.0;
                    neg += cross < 0.0;
                }
                if (pos == 0 || neg == 0) {
                    out[static_cast<std::size_t>(j) * w + i] = 1;
                    break;
                }
            }
        }
    }
    return out;
}

/// Direct log of the unfactored measurement likelihood: foreground product
/// times background product over the total product, pixel by pixel.
inline double direct_log_likelihood(const AppearanceModel& model, const Image& img,
                                    const SilhouetteMask& mask) {
    double fg = 0.0, bg = 0.0, total = 0.0;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const auto v = img.at(x, y);
            if (mask.at(x, y)) {
                fg += std::log(model.foreground[v]);
            } else {
                bg += std::log(model.background[v]);
            }
            total += std::log(model.total[v]);
        }
    }
    return fg + bg - total;
}

/// Histogram from arbitrary positive counts, with the library's floor.
template <typename Rng>
IntensityHistogram random_histogram(Rng& rng) {
    std::array<std::uint64_t, kIntensityLevels> counts{};
    std::uniform_int_distribution<int> occupancy(0, 3);
    std::uniform_int_distribution<std::uint64_t> count(1, 1000);
    for (auto& c : counts) c = occupancy(rng) == 0 ? 0 : count(rng);
    counts[0] += 1;
    return IntensityHistogram::from_counts(counts);
}

template <typename Rng>
Image random_image(Rng& rng, int w, int h) {
    Image img(w, h);
    std::uniform_int_distribution<int> v(0, 255);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(v(rng));
    return img;
}

template <typename Rng>
SilhouetteMask random_mask(Rng& rng, int w, int h, double p_on = 0.4) {
    SilhouetteMask mask(w, h);
    std::bernoulli_distribution on(p_on);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (on(rng)) mask.set(x, y);
        }
    }
    return mask;
}

/// Random triangles for a w x h scene. With `dyadic`, vertices sit on a
/// 1/4-pixel grid so that pixel centers land exactly on edges and vertices.
template <typename Rng>
std::vector<Triangle2> random_triangles(Rng& rng, int w, int h, bool dyadic) {
    std::uniform_int_distribution<int> count(0, 12);
    std::uniform_real_distribution<double> ux(-0.25 * w, 1.25 * w);
    std::uniform_real_distribution<double> uy(-0.25 * h, 1.25 * h);
    std::uniform_int_distribution<int> kind(0, 9);
    const int n = count(rng);
    std::vector<Triangle2> tris;
    for (int t = 0; t < n; ++t) {
        Triangle2 tri;
        for (auto& v : tri) {
            v = {ux(rng), uy(rng)};
            if (dyadic) v = {std::round(v[0] * 4.0) / 4.0, std::round(v[1] * 4.0) / 4.0};
        }
        // Some degenerate triangles: a repeated vertex or three collinear points.
        const int k = kind(rng);
        if (k == 0) tri[2] = tri[0];
        if (k == 1) tri[2] = {2.0 * tri[1][0] - tri[0][0], 2.0 * tri[1][1] - tri[0][1]};
        tris.push_back(tri);
    }
    return tris;
}

/// Every Euler triple (intrinsic Z-Y-X) describing the same rotation.
inline std::vector<std::array<double, 3>> equivalent_angles(double yaw, double pitch, double roll) {
    const double pi = std::numbers::pi;
    return {{yaw, pitch, roll}, {yaw + pi, pi - pitch, roll + pi}};
}

using Matrix3 = std::array<Vec3, 3>;

/// Euler angles of Rz(yaw) * Ry(pitch) * Rx(roll).
inline std::array<double, 3> euler_zyx(const Matrix3& r) {
    return {std::atan2(r[1][0], r[0][0]), std::asin(std::clamp(-r[2][0], -1.0, 1.0)),
            std::atan2(r[2][1], r[2][2])};
}

/// An orthogonal map S of the rest mesh about its centroid, with
/// S * mesh(theta) == mesh(articulation_sign * theta).
struct SilhouetteSymmetry {
    Matrix3 matrix{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
    double articulation_sign = 1.0;
};

/// Reads `name.sym` next to a mesh fixture: `sym m00 m01 ... m22 sign`
/// lines. A fixture without a file has only the identity.
inline std::vector<SilhouetteSymmetry> fixture_symmetries(const std::string& mesh_name) {
    auto path = fixture(mesh_name);
    path.replace_extension(".sym");
    std::ifstream in(path);
    if (!in) return {SilhouetteSymmetry{}};
    std::vector<SilhouetteSymmetry> out;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream fields(line);
        std::string kind;
        if (!(fields >> kind) || kind != "sym") continue;
        SilhouetteSymmetry s;
        for (auto& row : s.matrix) {
            for (auto& x : row) fields >> x;
        }
        fields >> s.articulation_sign;
        if (!fields) throw std::runtime_error("bad symmetry line in " + path.string() + ": " + line);
        out.push_back(s);
    }
    return out;
}

/// The estimate re-expressed under symmetry `s`. Its silhouette equals the
/// estimate's: rotating by R * S^T the mesh mapped by S is rotating the
/// original by R, and when R * S^T is improper, negating the depth row
/// leaves the orthographic projection unchanged.
inline PoseParams apply_symmetry(const PoseParams& pose, const SilhouetteSymmetry& s) {
    const auto r = rotation_zyx(pose.yaw, pose.pitch, pose.roll);
    Matrix3 q{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            for (int k = 0; k < 3; ++k) q[i][j] += r[i][k] * s.matrix[j][k];
        }
    }
    const double det = q[0][0] * (q[1][1] * q[2][2] - q[1][2] * q[2][1]) -
                       q[0][1] * (q[1][0] * q[2][2] - q[1][2] * q[2][0]) +
                       q[0][2] * (q[1][0] * q[2][1] - q[1][1] * q[2][0]);
    if (det < 0.0) {
        for (auto& x : q[2]) x = -x;
    }
    const auto e = euler_zyx(q);
    PoseParams out = pose;
    out.yaw = e[0];
    out.pitch = e[1];
    out.roll = e[2];
    out.articulation = s.articulation_sign * pose.articulation;
    return out;
}

struct PoseErrors {
    std::array<double, 3> angles{};  // radians
    double articulation = 0.0;       // radians
};

/// Per-angle and articulation errors of `estimate`, minimized over the
/// declared symmetries and both Euler triples of each rotation. The
/// representative with the smallest worst-case error is reported.
inline PoseErrors pose_errors(const PoseParams& estimate, const PoseParams& truth,
                              const std::vector<SilhouetteSymmetry>& symmetries, bool articulated) {
    PoseErrors best;
    double best_max = std::numeric_limits<double>::infinity();
    for (const auto& s : symmetries) {
        const auto p = apply_symmetry(estimate, s);
        const double da = std::abs(wrap_angle(p.articulation - truth.articulation));
        for (const auto& e : equivalent_angles(p.yaw, p.pitch, p.roll)) {
            const std::array<double, 3> err{std::abs(wrap_angle(e[0] - truth.yaw)),
                                            std::abs(wrap_angle(e[1] - truth.pitch)),
                                            std::abs(wrap_angle(e[2] - truth.roll))};
            const double m = std::max({err[0], err[1], err[2], articulated ? da : 0.0});
            if (m < best_max) {
                best_max = m;
                best = {err, da};
            }
        }
    }
    return best;
}

}  // namespace silpose::testing
