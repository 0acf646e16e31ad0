#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace silpose {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

/// Single revolute joint: rotates the vertices of `member_triangles` about
/// `axis` through `pivot`.
struct Joint {
    std::string name;
    Vec3 axis{0.0, 0.0, 1.0};
    Vec3 pivot{0.0, 0.0, 0.0};
    std::vector<std::size_t> member_triangles;
};

/// Immutable after load. Triangle indices are 0-based in memory.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;
    std::optional<Joint> joint;

    bool articulated() const noexcept { return joint.has_value(); }

    /// Throws ValidationError if any invariant is broken.
    void validate() const;

    /// Mean of all vertices; the rotation center used by apply_pose.
    Vec3 centroid() const;

    /// Largest distance from the centroid to any vertex.
    double radius() const;

    /// Sorted, de-duplicated vertex indices touched by the joint's triangles.
    std::vector<std::uint32_t> joint_vertices() const;
};

/// The particle state: an affine camera plus one optional articulation angle.
///
/// Angles are radians. `tx`, `ty` are pixels, `scale` is pixels per model unit.
struct PoseParams {
    double yaw = 0.0;
    double pitch = 0.0;
    double roll = 0.0;
    double tx = 0.0;
    double ty = 0.0;
    double scale = 1.0;
    double articulation = 0.0;

    static constexpr std::size_t kFieldCount = 7;

    /// Field access in declaration order, used by per-field arithmetic.
    double& operator[](std::size_t i);
    double operator[](std::size_t i) const;

    bool valid() const noexcept;

    friend bool operator==(const PoseParams&, const PoseParams&) = default;
};

using Triangle2 = std::array<Vec2, 3>;

/// Binary per-pixel partition. true = foreground.
///
/// Tracks the bounding rectangle of the set bits so that consumers can visit
/// only the foreground.
class SilhouetteMask {
public:
    SilhouetteMask() = default;
    SilhouetteMask(int w, int h);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
    void set(int x, int y);
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }
    std::size_t count() const;
    void clear();

    /// Half-open rectangle holding every set bit; empty when no bit is set.
    int fg_x0() const noexcept { return x0_; }
    int fg_x1() const noexcept { return x1_; }
    int fg_y0() const noexcept { return y0_; }
    int fg_y1() const noexcept { return y1_; }

    friend bool operator==(const SilhouetteMask& a, const SilhouetteMask& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.bits_ == b.bits_;
    }

private:
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
    int x0_ = 0, x1_ = 0, y0_ = 0, y1_ = 0;
};

/// Rotation matrix for intrinsic Z-Y-X (yaw, pitch, roll), row-major.
std::array<Vec3, 3> rotation_zyx(double yaw, double pitch, double roll);

/// Rotate `p` by `angle` about the line through `pivot` along unit `axis`.
Vec3 rotate_about_axis(const Vec3& p, const Vec3& axis, const Vec3& pivot, double angle);

/// Articulate, rotate about the centroid, drop z, scale and translate.
/// Image convention: origin top-left, x right, y down.
std::vector<Vec2> project_vertices(const TriangleMesh& mesh, const PoseParams& pose);

std::vector<Triangle2> apply_pose(const TriangleMesh& mesh, const PoseParams& pose);

/// Pixel (i, j) is set iff (i + 0.5, j + 0.5) is inside or on the boundary of
/// some non-degenerate triangle.
SilhouetteMask rasterize_silhouette(std::span<const Triangle2> tris, int width, int height);

/// Same as above but reuses `mask`'s storage.
void rasterize_silhouette_into(std::span<const Triangle2> tris, SilhouetteMask& mask);

struct BoundingBox2 {
    double x0, y0, x1, y1;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double diagonal() const;
};

BoundingBox2 bounding_box(std::span<const Vec2> points);

}  // namespace silpose
