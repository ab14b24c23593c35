#include <cmath>
#include <vector>

#include "doctest.h"
#include "meshcorr/decimate.hpp"
#include "meshcorr/error.hpp"
#include "meshcorr/primitives.hpp"
#include "meshcorr/rng.hpp"

using namespace meshcorr;

namespace {

bool same_vertices(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].x() != b[i].x() || a[i].y() != b[i].y() || a[i].z() != b[i].z()) return false;
    }
    return true;
}

Mesh jittered_sphere(std::uint64_t seed, double amount = 0.05) {
    Mesh sphere = make_icosphere(2);
    Rng rng(seed);
    std::vector<Vec3> moved = sphere.vertices();
    for (Vec3& v : moved) v *= 1.0 + amount * (rng.uniform() - 0.5);
    return sphere.with_vertices(moved);
}

}  // namespace

TEST_CASE("icosphere decimation hits the target and stays on the sphere") {
    Mesh sphere = make_icosphere(3);
    REQUIRE(sphere.edge_count() == 1920);
    DecimationResult result = qslim_decimate(sphere, 480);
    CHECK(result.mesh.edge_count() == 480);
    CHECK(result.mesh.validate().closed_manifold());
    CHECK(result.mesh.euler_characteristic() == 2);
    double worst = 0;
    for (const Vec3& v : result.mesh.vertices()) {
        worst = std::max(worst, std::abs(v.norm() - 1.0));
    }
    CHECK(worst <= 0.02);
}

TEST_CASE("cube decimates from 18 to 12 edges and stays closed") {
    Mesh box = make_box();
    REQUIRE(box.edge_count() == 18);
    DecimationResult result = qslim_decimate(box, 12);
    CHECK(result.mesh.edge_count() == 12);
    CHECK(result.mesh.validate().closed_manifold());
    CHECK(result.mesh.euler_characteristic() == 2);
}

TEST_CASE("mesh already at the target is returned unchanged with an empty trace") {
    Mesh sphere = make_icosphere(1);
    DecimationResult result = qslim_decimate(sphere, sphere.edge_count());
    CHECK(result.trace.empty());
    CHECK(result.mesh.faces() == sphere.faces());
    CHECK(same_vertices(result.mesh.vertices(), sphere.vertices()));
    for (int e = 0; e < sphere.edge_count(); ++e) CHECK(result.trace.final_edge_of_slot[e] == e);
}

TEST_CASE("replaying the collapse trace reproduces the decimated mesh exactly") {
    for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
        Mesh source = jittered_sphere(seed);
        DecimationResult result = qslim_decimate(source, 120);
        Mesh replayed = replay_collapses(source, result.trace);
        CHECK(replayed.faces() == result.mesh.faces());
        CHECK(same_vertices(replayed.vertices(), result.mesh.vertices()));
    }
}

TEST_CASE("decimation of an open strip preserves its Euler characteristic") {
    Mesh strip = make_grid_strip(8, 5);
    const int chi = strip.euler_characteristic();
    DecimationResult result = qslim_decimate(strip, strip.edge_count() - 24);
    CHECK(result.mesh.edge_count() == strip.edge_count() - 24);
    CHECK(result.mesh.euler_characteristic() == chi);
    const ValidationReport report = result.mesh.validate();
    CHECK(report.manifold());
    CHECK_FALSE(report.closed);
    CHECK(result.mesh.boundary_loops().size() == 1);
}

TEST_CASE("boundary rim does not erode under decimation") {
    Mesh strip = make_grid_strip(10, 6);
    DecimationResult result = qslim_decimate(strip, strip.edge_count() / 2);
    // The strip is flat in z and its rim is the rectangle [0,10]x[0,6].
    for (const Vec3& v : result.mesh.vertices()) {
        CHECK(std::abs(v.z()) < 1e-9);
        CHECK(v.x() > -1e-9);
        CHECK(v.x() < 10.0 + 1e-9);
        CHECK(v.y() > -1e-9);
        CHECK(v.y() < 6.0 + 1e-9);
    }
}

TEST_CASE("deterministic: the same input yields an identical trace") {
    Mesh source = jittered_sphere(99);
    DecimationResult a = qslim_decimate(source, 150);
    DecimationResult b = qslim_decimate(source, 150);
    REQUIRE(a.trace.ops.size() == b.trace.ops.size());
    for (std::size_t i = 0; i < a.trace.ops.size(); ++i) {
        CHECK(a.trace.ops[i].edge == b.trace.ops[i].edge);
        CHECK(a.trace.ops[i].kept_vertex == b.trace.ops[i].kept_vertex);
        CHECK(a.trace.ops[i].gone_vertex == b.trace.ops[i].gone_vertex);
        CHECK(a.trace.ops[i].new_position.x() == b.trace.ops[i].new_position.x());
    }
    CHECK(same_vertices(a.mesh.vertices(), b.mesh.vertices()));
}

TEST_CASE("targets below six edges are rejected") {
    CHECK_THROWS_WITH_AS(qslim_decimate(make_tetrahedron(), 5), doctest::Contains("decimate/target"),
                         Error);
    CHECK_THROWS_WITH_AS(qslim_decimate(make_tetrahedron(), 12), doctest::Contains("decimate/target"),
                         Error);
}

TEST_CASE("unreachable targets raise a floor error with the achieved count") {
    // A closed mesh sheds exactly 3 edges per collapse, so 18 -> 13 is
    // unreachable; the decimator must stop at 15.
    try {
        qslim_decimate(make_box(), 13);
        FAIL("expected a floor error");
    } catch (const Error& err) {
        const std::string msg = err.what();
        CHECK(msg.find("decimate/floor") != std::string::npos);
        CHECK(msg.find("15") != std::string::npos);
    }
}

TEST_CASE("decimating to the minimum leaves a tetrahedron-sized closed mesh") {
    Mesh tet = make_tetrahedron();
    DecimationResult noop = qslim_decimate(tet, 6);
    CHECK(noop.trace.empty());

    DecimationResult full = qslim_decimate(make_icosphere(1), 6);
    CHECK(full.mesh.edge_count() == 6);
    CHECK(full.mesh.validate().closed_manifold());
}

TEST_CASE("vertex origins point at nearby source vertices") {
    Mesh source = make_icosphere(2);
    DecimationResult result = qslim_decimate(source, 120);
    REQUIRE(static_cast<int>(result.trace.source_vertex_of_final.size()) ==
            result.mesh.vertex_count());
    for (int v = 0; v < result.mesh.vertex_count(); ++v) {
        const int origin = result.trace.source_vertex_of_final[v];
        REQUIRE(origin >= 0);
        REQUIRE(origin < source.vertex_count());
        // On a gently decimated sphere the representative source vertex
        // stays within a couple of edge lengths.
        CHECK((source.vertex(origin) - result.mesh.vertex(v)).norm() < 0.5);
    }
}

TEST_CASE("final edge map matches the surviving edge endpoints") {
    Mesh source = jittered_sphere(5);
    DecimationResult result = qslim_decimate(source, 240);
    int alive = 0;
    for (int slot = 0; slot < result.trace.source_edge_count; ++slot) {
        if (result.trace.final_edge_of_slot[slot] >= 0) ++alive;
    }
    CHECK(alive == result.mesh.edge_count());
}
