#include "silpose/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "silpose/error.hpp"

namespace silpose {

namespace {

// Twice the signed area of (a, b, p). Positive when p is left of a->b.
inline double orient2d(const Vec2& a, const Vec2& b, double px, double py) {
    return (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0]);
}

}  // namespace

void TriangleMesh::validate() const {
    const auto n = vertices.size();
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        for (auto idx : triangles[t]) {
            if (idx >= n) {
                throw ValidationError("triangle " + std::to_string(t + 1) + " references vertex " +
                                      std::to_string(idx + 1) + " but the mesh has " +
                                      std::to_string(n) + " vertices");
            }
        }
    }
    for (const auto& v : vertices) {
        if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2])) {
            throw ValidationError("non-finite vertex coordinate");
        }
    }
    if (joint) {
        const auto& a = joint->axis;
        const double len = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
        if (std::abs(len - 1.0) > 1e-9) {
            throw ValidationError("joint '" + joint->name + "' axis is not unit length (|axis| = " +
                                  std::to_string(len) + ")");
        }
        for (auto t : joint->member_triangles) {
            if (t >= triangles.size()) {
                throw ValidationError("joint '" + joint->name + "' lists triangle " +
                                      std::to_string(t + 1) + " but the mesh has " +
                                      std::to_string(triangles.size()) + " triangles");
            }
        }
    }
}

Vec3 TriangleMesh::centroid() const {
    Vec3 c{0.0, 0.0, 0.0};
    if (vertices.empty()) return c;
    for (const auto& v : vertices) {
        c[0] += v[0];
        c[1] += v[1];
        c[2] += v[2];
    }
    const double n = static_cast<double>(vertices.size());
    return {c[0] / n, c[1] / n, c[2] / n};
}

double TriangleMesh::radius() const {
    const Vec3 c = centroid();
    double r2 = 0.0;
    for (const auto& v : vertices) {
        const double dx = v[0] - c[0], dy = v[1] - c[1], dz = v[2] - c[2];
        r2 = std::max(r2, dx * dx + dy * dy + dz * dz);
    }
    return std::sqrt(r2);
}

std::vector<std::uint32_t> TriangleMesh::joint_vertices() const {
    std::vector<std::uint32_t> out;
    if (!joint) return out;
    for (auto t : joint->member_triangles) {
        out.insert(out.end(), triangles[t].begin(), triangles[t].end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double& PoseParams::operator[](std::size_t i) {
    switch (i) {
        case 0: return yaw;
        case 1: return pitch;
        case 2: return roll;
        case 3: return tx;
        case 4: return ty;
        case 5: return scale;
        default: return articulation;
    }
}

double PoseParams::operator[](std::size_t i) const {
    return const_cast<PoseParams&>(*this)[i];
}

bool PoseParams::valid() const noexcept {
    for (std::size_t i = 0; i < kFieldCount; ++i) {
        if (!std::isfinite((*this)[i])) return false;
    }
    return scale > 0.0;
}

SilhouetteMask::SilhouetteMask(int w, int h)
    : width_(w), height_(h), bits_(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {}

void SilhouetteMask::set(int x, int y) {
    bits_[index(x, y)] = 1;
    if (x0_ >= x1_) {
        x0_ = x;
        x1_ = x + 1;
        y0_ = y;
        y1_ = y + 1;
        return;
    }
    x0_ = std::min(x0_, x);
    x1_ = std::max(x1_, x + 1);
    y0_ = std::min(y0_, y);
    y1_ = std::max(y1_, y + 1);
}

std::size_t SilhouetteMask::count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

void SilhouetteMask::clear() {
    for (int y = y0_; y < y1_; ++y) {
        auto row = bits_.begin() + static_cast<std::ptrdiff_t>(index(0, y));
        std::fill(row + x0_, row + x1_, std::uint8_t{0});
    }
    x0_ = x1_ = y0_ = y1_ = 0;
}

std::array<Vec3, 3> rotation_zyx(double yaw, double pitch, double roll) {
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    const double cp = std::cos(pitch), sp = std::sin(pitch);
    const double cr = std::cos(roll), sr = std::sin(roll);
    // Rz(yaw) * Ry(pitch) * Rx(roll)
    return {{
        {cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr},
        {sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr},
        {-sp, cp * sr, cp * cr},
    }};
}

Vec3 rotate_about_axis(const Vec3& p, const Vec3& axis, const Vec3& pivot, double angle) {
    // Rodrigues: v cos + (k x v) sin + k (k.v)(1 - cos)
    const Vec3 v{p[0] - pivot[0], p[1] - pivot[1], p[2] - pivot[2]};
    const double c = std::cos(angle), s = std::sin(angle);
    const double kv = axis[0] * v[0] + axis[1] * v[1] + axis[2] * v[2];
    const Vec3 kxv{axis[1] * v[2] - axis[2] * v[1], axis[2] * v[0] - axis[0] * v[2],
                   axis[0] * v[1] - axis[1] * v[0]};
    Vec3 out{};
    for (int i = 0; i < 3; ++i) {
        out[i] = v[i] * c + kxv[i] * s + axis[i] * kv * (1.0 - c) + pivot[i];
    }
    return out;
}

std::vector<Vec2> project_vertices(const TriangleMesh& mesh, const PoseParams& pose) {
    std::vector<Vec3> local = mesh.vertices;
    if (mesh.joint && pose.articulation != 0.0) {
        for (auto idx : mesh.joint_vertices()) {
            local[idx] = rotate_about_axis(local[idx], mesh.joint->axis, mesh.joint->pivot,
                                           pose.articulation);
        }
    }

    // The rotation center is the rest-pose centroid so that articulation does
    // not shift the body.
    const Vec3 c = mesh.centroid();
    const auto r = rotation_zyx(pose.yaw, pose.pitch, pose.roll);
    std::vector<Vec2> out;
    out.reserve(local.size());
    for (const auto& v : local) {
        const double dx = v[0] - c[0], dy = v[1] - c[1], dz = v[2] - c[2];
        const double x = r[0][0] * dx + r[0][1] * dy + r[0][2] * dz + c[0];
        const double y = r[1][0] * dx + r[1][1] * dy + r[1][2] * dz + c[1];
        out.push_back({pose.scale * x + pose.tx, pose.scale * y + pose.ty});
    }
    return out;
}

std::vector<Triangle2> apply_pose(const TriangleMesh& mesh, const PoseParams& pose) {
    const auto pts = project_vertices(mesh, pose);
    std::vector<Triangle2> tris;
    tris.reserve(mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
        tris.push_back({pts[t[0]], pts[t[1]], pts[t[2]]});
    }
    return tris;
}

SilhouetteMask rasterize_silhouette(std::span<const Triangle2> tris, int width, int height) {
    if (width <= 0 || height <= 0) {
        throw ValidationError("rasterize_silhouette: image dimensions must be positive");
    }
    SilhouetteMask mask(width, height);
    rasterize_silhouette_into(tris, mask);
    return mask;
}

void rasterize_silhouette_into(std::span<const Triangle2> tris, SilhouetteMask& mask) {
    mask.clear();
    const int w = mask.width(), h = mask.height();

    for (const auto& t : tris) {
        const auto& a = t[0];
        const auto& b = t[1];
        const auto& c = t[2];
        const double area = orient2d(a, b, c[0], c[1]);
        if (area == 0.0 || !std::isfinite(area)) continue;

        const double minx = std::min({a[0], b[0], c[0]});
        const double maxx = std::max({a[0], b[0], c[0]});
        const double miny = std::min({a[1], b[1], c[1]});
        const double maxy = std::max({a[1], b[1], c[1]});

        // Pixel i has center i + 0.5; keep the candidates whose center can
        // fall inside the box.
        const double fx0 = std::max(std::ceil(minx - 0.5), 0.0);
        const double fx1 = std::min(std::floor(maxx - 0.5), static_cast<double>(w - 1));
        const double fy0 = std::max(std::ceil(miny - 0.5), 0.0);
        const double fy1 = std::min(std::floor(maxy - 0.5), static_cast<double>(h - 1));
        if (fx0 > fx1 || fy0 > fy1) continue;
        const int x0 = static_cast<int>(fx0), x1 = static_cast<int>(fx1);
        const int y0 = static_cast<int>(fy0), y1 = static_cast<int>(fy1);

        for (int y = y0; y <= y1; ++y) {
            const double py = y + 0.5;
            for (int x = x0; x <= x1; ++x) {
                const double px = x + 0.5;
                const double e0 = orient2d(a, b, px, py);
                const double e1 = orient2d(b, c, px, py);
                const double e2 = orient2d(c, a, px, py);
                const bool inside = (e0 >= 0.0 && e1 >= 0.0 && e2 >= 0.0) ||
                                    (e0 <= 0.0 && e1 <= 0.0 && e2 <= 0.0);
                if (inside) mask.set(x, y);
            }
        }
    }
}

double BoundingBox2::diagonal() const { return std::hypot(width(), height()); }

BoundingBox2 bounding_box(std::span<const Vec2> points) {
    if (points.empty()) return {0.0, 0.0, 0.0, 0.0};
    BoundingBox2 box{points[0][0], points[0][1], points[0][0], points[0][1]};
    for (const auto& p : points) {
        box.x0 = std::min(box.x0, p[0]);
        box.y0 = std::min(box.y0, p[1]);
        box.x1 = std::max(box.x1, p[0]);
        box.y1 = std::max(box.y1, p[1]);
    }
    return box;
}

}  // namespace silpose
