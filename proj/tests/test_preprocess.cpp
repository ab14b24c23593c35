#include <cmath>

#include "doctest.h"
#include "meshcorr/error.hpp"
#include "meshcorr/preprocess.hpp"
#include "meshcorr/primitives.hpp"

using namespace meshcorr;

namespace {

MeshData mesh_to_data(const Mesh& mesh) {
    MeshData data;
    data.vertices = mesh.vertices();
    data.faces = mesh.faces();
    return data;
}

bool same_vertices(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].x() != b[i].x() || a[i].y() != b[i].y() || a[i].z() != b[i].z()) return false;
    }
    return true;
}

MeshData two_tetrahedra() {
    MeshData data;
    Mesh small = make_tetrahedron(1.0);
    Mesh big = make_tetrahedron(2.0);
    for (const Vec3& v : small.vertices()) data.vertices.push_back(v);
    for (const auto& f : small.faces()) data.faces.push_back(f);
    const int off = small.vertex_count();
    for (const Vec3& v : big.vertices()) data.vertices.push_back(v + Vec3(10, 0, 0));
    for (const auto& f : big.faces()) data.faces.push_back({f[0] + off, f[1] + off, f[2] + off});
    return data;
}

}  // namespace

TEST_CASE("largest component by area survives") {
    MeshData data = two_tetrahedra();
    keep_largest_component(data);
    remove_unreferenced_vertices(data);
    Mesh mesh{std::move(data)};
    CHECK(mesh.face_count() == 4);
    // The 2x tetrahedron was translated to x ~ 10.
    CHECK(mesh.centroid().x() > 5.0);
}

TEST_CASE("non-manifold edge repair deletes the smallest incident faces") {
    MeshData data = mesh_to_data(make_tetrahedron());
    // Glue a small flap onto an existing edge: that edge now has 3 faces.
    data.vertices.push_back(data.vertices[0] + Vec3(0.01, 0.01, 0.01));
    data.faces.push_back({0, 1, 4});
    const int removed = repair_nonmanifold_edges(data);
    CHECK(removed == 1);
    CHECK(data.faces.size() == 4);
    remove_unreferenced_vertices(data);
    Mesh mesh{std::move(data)};
    CHECK(mesh.validate().closed_manifold());
}

TEST_CASE("bowtie vertices keep only their largest fan") {
    MeshData data;
    data.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0),
                     Vec3(-2, 0, 0), Vec3(0, -2, 0)};
    data.faces = {{0, 1, 2}, {0, 3, 4}};
    const int removed = repair_vertex_fans(data);
    CHECK(removed == 1);
    REQUIRE(data.faces.size() == 1);
    // The larger triangle is the one that stays.
    CHECK(data.faces[0] == std::array<int, 3>{0, 3, 4});
}

TEST_CASE("preprocessing an already-clean mesh at its own size is a no-op") {
    Mesh sphere = make_icosphere(2);
    PreprocessResult result = preprocess_scan(sphere, sphere.edge_count());
    CHECK(result.trace.empty());
    CHECK(result.mesh.faces() == sphere.faces());
    CHECK(same_vertices(result.mesh.vertices(), sphere.vertices()));
}

TEST_CASE("preprocess pipeline repairs, keeps largest component, and decimates") {
    MeshData data = two_tetrahedra();
    PreprocessResult result = preprocess_scan(data, 6);
    CHECK(result.mesh.edge_count() == 6);
    CHECK(result.mesh.validate().closed_manifold());
    CHECK(result.mesh.centroid().x() > 5.0);
    // Vertex map covers the raw input and keeps only the big tetrahedron.
    CHECK(result.vertex_map.size() == data.vertices.size());
    CHECK(result.vertex_map[0] == -1);
}

TEST_CASE("preprocess is idempotent") {
    Mesh sphere = make_icosphere(2);
    Mesh once = preprocess(sphere, 240);
    Mesh twice = preprocess(once, 240);
    CHECK(once.faces() == twice.faces());
    CHECK(same_vertices(once.vertices(), twice.vertices()));
}

TEST_CASE("edge features are midpoints plus averaged unit normals") {
    MeshData data;
    data.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    data.faces = {{0, 1, 2}};
    data.normals = {Vec3(0, 0, 1), Vec3(0, 0, 1), Vec3(0, 0, 1)};
    Mesh mesh{std::move(data)};
    FeatureMatrix f = edge_features(mesh);
    REQUIRE(f.rows() == 3);
    REQUIRE(f.cols() == 6);
    const int e01 = mesh.edge_index(0, 1);
    CHECK(f(e01, 0) == doctest::Approx(0.5));
    CHECK(f(e01, 1) == doctest::Approx(0.0));
    CHECK(f(e01, 2) == doctest::Approx(0.0));
    CHECK(f(e01, 3) == doctest::Approx(0.0));
    CHECK(f(e01, 4) == doctest::Approx(0.0));
    CHECK(f(e01, 5) == doctest::Approx(1.0));
}

TEST_CASE("edge feature normal channels are unit length on a tetrahedron") {
    Mesh mesh = make_tetrahedron();
    FeatureMatrix f = edge_features(mesh);
    REQUIRE(f.rows() == 6);
    for (int e = 0; e < 6; ++e) {
        const double n = Vec3(f(e, 3), f(e, 4), f(e, 5)).norm();
        CHECK(n == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("translating a mesh shifts only the positional feature channels") {
    Mesh mesh = make_icosphere(1);
    const Vec3 t(0.3, -1.2, 2.5);
    std::vector<Vec3> moved = mesh.vertices();
    for (Vec3& v : moved) v += t;
    Mesh shifted = mesh.with_vertices(moved);
    FeatureMatrix a = edge_features(mesh);
    FeatureMatrix b = edge_features(shifted);
    for (int e = 0; e < mesh.edge_count(); ++e) {
        CHECK((Vec3(b(e, 0), b(e, 1), b(e, 2)) - Vec3(a(e, 0), a(e, 1), a(e, 2)) - t).norm() <
              1e-9);
        CHECK((Vec3(b(e, 3), b(e, 4), b(e, 5)) - Vec3(a(e, 3), a(e, 4), a(e, 5))).norm() < 1e-9);
    }
}

TEST_CASE("cancelling endpoint normals fall back to a face normal") {
    MeshData data;
    data.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    data.faces = {{0, 1, 2}};
    data.normals = {Vec3(0, 0, 1), Vec3(0, 0, -1), Vec3(0, 0, 1)};
    Mesh mesh{std::move(data)};
    FeatureMatrix f = edge_features(mesh);
    const int e01 = mesh.edge_index(0, 1);
    const Vec3 n(f(e01, 3), f(e01, 4), f(e01, 5));
    CHECK((n - Vec3(0, 0, 1)).norm() < 1e-12);
}
