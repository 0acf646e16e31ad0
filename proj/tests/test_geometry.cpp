#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <random>
#include <sstream>

#include "silpose/error.hpp"
#include "silpose/geometry.hpp"
#include "silpose/io.hpp"
#include "support.hpp"

using namespace silpose;
using namespace silpose::testing;

namespace {

TriangleMesh mesh_from(const std::string& text) {
    std::istringstream in(text);
    return parse_mesh(in);
}

// Four vertices whose centroid is the origin.
TriangleMesh centered_cross() {
    return mesh_from("v 1 0 0\nv -1 0 0\nv 0 1 0\nv 0 -1 0\nf 1 3 2\nf 1 2 4\n");
}

}  // namespace

TEST(LoadMesh, SingleTriangle) {
    const auto mesh = mesh_from("# one triangle\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
    EXPECT_EQ(mesh.vertices.size(), 3u);
    EXPECT_EQ(mesh.triangles.size(), 1u);
    EXPECT_FALSE(mesh.joint);
}

TEST(LoadMesh, UnitCubeFixture) {
    const auto mesh = load_mesh(fixture("unit_cube.mesh"));
    EXPECT_EQ(mesh.vertices.size(), 8u);
    EXPECT_EQ(mesh.triangles.size(), 12u);
}

TEST(LoadMesh, VertexIndexOutOfRangeNamesTheLine) {
    try {
        mesh_from("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 99\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4u);
        EXPECT_NE(std::string(e.what()).find("99"), std::string::npos);
    }
}

TEST(LoadMesh, MalformedNumberReportsLine) {
    try {
        mesh_from("v 0 0 0\nv 1 zero 0\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(LoadMesh, UnknownRecordRejected) {
    EXPECT_THROW(mesh_from("vt 0 0\n"), ParseError);
}

TEST(LoadMesh, NonUnitJointAxisRejected) {
    EXPECT_THROW(mesh_from("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\njoint j 0 2 0 0 0 0\njf 1\n"),
                 ValidationError);
}

TEST(LoadMesh, JointTriangleOutOfRange) {
    EXPECT_THROW(mesh_from("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\njoint j 0 1 0 0 0 0\njf 2\n"),
                 ParseError);
}

TEST(LoadMesh, JointFixture) {
    const auto mesh = load_mesh(fixture("probe_panel.mesh"));
    ASSERT_TRUE(mesh.joint);
    EXPECT_EQ(mesh.joint->name, "panel");
    EXPECT_EQ(mesh.joint->member_triangles.size(), 12u);
    EXPECT_EQ(mesh.joint_vertices().size(), 8u);
}

TEST(ApplyPose, IdentityDropsZ) {
    const auto mesh = mesh_from("v 1 2 3\nv 0 0 0\nv 2 4 6\nf 1 2 3\n");
    const auto pts = project_vertices(mesh, PoseParams{});
    EXPECT_EQ(pts[0][0], 1.0);
    EXPECT_EQ(pts[0][1], 2.0);
}

TEST(ApplyPose, ScaleAndTranslate) {
    const auto mesh = mesh_from("v 1 2 3\nv 0 0 0\nv 2 4 6\nf 1 2 3\n");
    PoseParams pose;
    pose.scale = 2.0;
    pose.tx = pose.ty = 10.0;
    const auto tris = apply_pose(mesh, pose);
    EXPECT_DOUBLE_EQ(tris[0][0][0], 12.0);
    EXPECT_DOUBLE_EQ(tris[0][0][1], 14.0);
}

TEST(ApplyPose, YawHalfTurn) {
    PoseParams pose;
    pose.yaw = std::numbers::pi;
    const auto pts = project_vertices(centered_cross(), pose);
    EXPECT_NEAR(pts[0][0], -1.0, 1e-9);
    EXPECT_NEAR(pts[0][1], 0.0, 1e-9);
}

TEST(ApplyPose, RotationMatrixIsOrthonormal) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> a(-std::numbers::pi, std::numbers::pi);
    for (int t = 0; t < 100; ++t) {
        const auto r = rotation_zyx(a(rng), a(rng), a(rng));
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                double dot = 0.0;
                for (int k = 0; k < 3; ++k) dot += r[i][k] * r[j][k];
                EXPECT_NEAR(dot, i == j ? 1.0 : 0.0, 1e-12);
            }
        }
    }
}

TEST(ApplyPose, ZeroArticulationIsBitExact) {
    const auto mesh = load_mesh(fixture("probe_panel.mesh"));
    PoseParams with_joint{0.3, -0.2, 0.9, 10.0, 20.0, 3.0, 0.0};
    TriangleMesh rigid = mesh;
    rigid.joint.reset();
    EXPECT_EQ(project_vertices(mesh, with_joint), project_vertices(rigid, with_joint));
}

TEST(ApplyPose, ArticulationMovesOnlyJointVertices) {
    const auto mesh = load_mesh(fixture("probe_panel.mesh"));
    PoseParams pose;
    pose.articulation = 0.5;
    const auto moved = project_vertices(mesh, pose);
    const auto rest = project_vertices(mesh, PoseParams{});
    const auto members = mesh.joint_vertices();
    for (std::uint32_t i = 0; i < mesh.vertices.size(); ++i) {
        const bool member = std::binary_search(members.begin(), members.end(), i);
        if (!member) EXPECT_EQ(moved[i], rest[i]) << "vertex " << i;
    }
    // The panel swings about the y axis, so its far edge changes x.
    EXPECT_NE(moved[members.back()][0], rest[members.back()][0]);
}

TEST(Rodrigues, QuarterTurnAboutZ) {
    const auto p = rotate_about_axis({2.0, 1.0, 5.0}, {0.0, 0.0, 1.0}, {1.0, 1.0, 0.0}, std::numbers::pi / 2);
    EXPECT_NEAR(p[0], 1.0, 1e-12);
    EXPECT_NEAR(p[1], 2.0, 1e-12);
    EXPECT_NEAR(p[2], 5.0, 1e-12);
}

TEST(Rasterize, EmptyIsAllBackground) {
    const auto mask = rasterize_silhouette({}, 4, 4);
    EXPECT_EQ(mask.count(), 0u);
    EXPECT_EQ(mask.fg_x0(), mask.fg_x1());
}

TEST(Rasterize, CoveringTriangleIsAllForeground) {
    const std::vector<Triangle2> tris{{Vec2{-10.0, -10.0}, Vec2{30.0, -10.0}, Vec2{-10.0, 30.0}}};
    EXPECT_EQ(rasterize_silhouette(tris, 4, 4).count(), 16u);
}

TEST(Rasterize, RightTriangleMatchesOracle) {
    const std::vector<Triangle2> tris{{Vec2{0.0, 0.0}, Vec2{4.0, 0.0}, Vec2{0.0, 4.0}}};
    const auto mask = rasterize_silhouette(tris, 4, 4);
    const auto oracle = brute_force_mask(tris, 4, 4);
    ASSERT_TRUE(std::equal(oracle.begin(), oracle.end(), mask.bits().begin()));
    // Centers with i + j <= 3 are inside; the anti-diagonal centers sum to 4
    // and lie on the hypotenuse, so they count too.
    EXPECT_EQ(mask.count(), 10u);
    EXPECT_TRUE(mask.at(3, 0));
    EXPECT_FALSE(mask.at(3, 1));
}

TEST(Rasterize, DegenerateTriangleContributesNothing) {
    const std::vector<Triangle2> tris{{Vec2{0.5, 0.5}, Vec2{2.5, 2.5}, Vec2{3.5, 3.5}}};
    EXPECT_EQ(rasterize_silhouette(tris, 4, 4).count(), 0u);
}

TEST(Rasterize, OffscreenTriangleContributesNothing) {
    const std::vector<Triangle2> tris{{Vec2{100.0, 100.0}, Vec2{140.0, 100.0}, Vec2{100.0, 140.0}}};
    EXPECT_EQ(rasterize_silhouette(tris, 16, 16).count(), 0u);
}

TEST(Rasterize, WindingDoesNotMatter) {
    const Triangle2 ccw{Vec2{1.0, 1.0}, Vec2{9.0, 2.0}, Vec2{3.0, 8.0}};
    const Triangle2 cw{ccw[0], ccw[2], ccw[1]};
    EXPECT_EQ(rasterize_silhouette(std::vector{ccw}, 10, 10), rasterize_silhouette(std::vector{cw}, 10, 10));
}

TEST(Rasterize, RejectsNonPositiveSize) {
    EXPECT_THROW(rasterize_silhouette({}, 0, 4), ValidationError);
}

TEST(RasterizeProperty, MatchesBruteForceOnRandomScenes) {
    std::mt19937_64 rng(1234);
    std::uniform_int_distribution<int> dim(1, 64);
    for (int s = 0; s < 300; ++s) {
        const int w = dim(rng), h = dim(rng);
        const auto tris = random_triangles(rng, w, h, s % 3 != 0);
        const auto mask = rasterize_silhouette(tris, w, h);
        const auto oracle = brute_force_mask(tris, w, h);
        ASSERT_TRUE(std::equal(oracle.begin(), oracle.end(), mask.bits().begin())) << "scene " << s;
    }
}

TEST(RasterizeProperty, ForegroundBoundsEncloseEveryPixel) {
    std::mt19937_64 rng(77);
    for (int s = 0; s < 50; ++s) {
        const auto tris = random_triangles(rng, 40, 30, false);
        const auto mask = rasterize_silhouette(tris, 40, 30);
        for (int y = 0; y < 30; ++y) {
            for (int x = 0; x < 40; ++x) {
                if (!mask.at(x, y)) continue;
                EXPECT_TRUE(x >= mask.fg_x0() && x < mask.fg_x1() && y >= mask.fg_y0() && y < mask.fg_y1());
            }
        }
    }
}

TEST(RasterizeProperty, ReusedBufferMatchesFreshMask) {
    std::mt19937_64 rng(5);
    SilhouetteMask scratch(48, 48);
    for (int s = 0; s < 50; ++s) {
        const auto tris = random_triangles(rng, 48, 48, false);
        rasterize_silhouette_into(tris, scratch);
        EXPECT_EQ(scratch, rasterize_silhouette(tris, 48, 48));
    }
}

TEST(RasterizeProperty, SquareAreaScalesQuadratically) {
    const auto square = mesh_from("v -0.5 -0.5 0\nv 0.5 -0.5 0\nv 0.5 0.5 0\nv -0.5 0.5 0\nf 1 2 3\nf 1 3 4\n");
    PoseParams pose;
    pose.yaw = 0.3;
    pose.tx = pose.ty = 64.0;
    for (double s : {8.0, 12.5, 20.0, 33.0, 60.0}) {
        pose.scale = s;
        const auto count = static_cast<double>(rasterize_silhouette(apply_pose(square, pose), 128, 128).count());
        EXPECT_NEAR(count / (s * s), 1.0, 0.10) << "scale " << s;
    }
}

TEST(RasterizeProperty, Deterministic) {
    const auto mesh = load_mesh(fixture("probe.mesh"));
    const PoseParams pose{0.4, 0.1, -1.2, 30.0, 33.0, 8.0, 0.0};
    EXPECT_EQ(rasterize_silhouette(apply_pose(mesh, pose), 64, 64),
              rasterize_silhouette(apply_pose(mesh, pose), 64, 64));
}

TEST(Fixtures, EulerExtractionInvertsRotation) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> a(-3.0, 3.0);
    std::uniform_real_distribution<double> p(-1.5, 1.5);
    for (int t = 0; t < 100; ++t) {
        const double yaw = a(rng), pitch = p(rng), roll = a(rng);
        const auto e = euler_zyx(rotation_zyx(yaw, pitch, roll));
        EXPECT_NEAR(e[0], yaw, 1e-9);
        EXPECT_NEAR(e[1], pitch, 1e-9);
        EXPECT_NEAR(e[2], roll, 1e-9);
    }
}

// Every declared symmetry must leave the projected vertex set unchanged.
class DeclaredSymmetry : public ::testing::TestWithParam<const char*> {};

TEST_P(DeclaredSymmetry, PreservesProjectedVertices) {
    const auto mesh = load_mesh(fixture(GetParam()));
    const auto symmetries = fixture_symmetries(GetParam());
    ASSERT_GT(symmetries.size(), 1u);
    auto sorted = [](std::vector<Vec2> pts) {
        for (auto& p : pts) p = {std::round(p[0] * 1e6) / 1e6, std::round(p[1] * 1e6) / 1e6};
        std::sort(pts.begin(), pts.end());
        return pts;
    };
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> a(-3.0, 3.0);
    for (int t = 0; t < 20; ++t) {
        const PoseParams pose{a(rng), a(rng) / 2.0, a(rng), 60.0, 50.0, 10.0, mesh.joint ? a(rng) : 0.0};
        const auto reference = sorted(project_vertices(mesh, pose));
        for (const auto& s : symmetries) {
            const auto moved = sorted(project_vertices(mesh, apply_symmetry(pose, s)));
            ASSERT_EQ(moved.size(), reference.size());
            for (std::size_t i = 0; i < moved.size(); ++i) {
                ASSERT_NEAR(moved[i][0], reference[i][0], 2e-6);
                ASSERT_NEAR(moved[i][1], reference[i][1], 2e-6);
            }
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Fixtures, DeclaredSymmetry, ::testing::Values("satellite.mesh", "satellite_hinged.mesh"));
