#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "meshcorr/error.hpp"

namespace meshcorr {

using Vec3 = Eigen::Vector3d;

/// Row-per-edge (or row-per-vertex) feature storage; column semantics are
/// declared per use.
using FeatureMatrix = Eigen::MatrixXd;

/// Raw mesh arrays before connectivity is built. Used by parsers and by
/// repair passes that need to mutate faces freely.
struct MeshData {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::vector<Vec3> normals;  // optional; empty or one per vertex
};

/// Undirected edge with canonical endpoint order (v0 < v1) and its one or
/// two incident faces (f1 == -1 on a boundary edge).
struct Edge {
    int v0 = -1;
    int v1 = -1;
    int f0 = -1;
    int f1 = -1;

    bool boundary() const { return f1 < 0; }
};

struct ValidationReport {
    bool vertex_manifold = true;  // every vertex's faces form a single fan
    bool closed = true;           // no boundary edges
    bool oriented = true;         // consistent counter-clockwise winding
    std::vector<std::string> issues;

    bool manifold() const { return vertex_manifold && oriented; }
    bool closed_manifold() const { return manifold() && closed; }
};

/// Indexed triangle mesh with a canonical edge list (edges sorted by
/// (min,max) vertex pair, lexicographically) and unit vertex normals.
/// Immutable after construction; all operations on meshes return new values.
class Mesh {
public:
    Mesh() = default;

    /// Builds connectivity. Throws Error("mesh/...") if a face references an
    /// out-of-range or repeated vertex, if any edge has more than two
    /// incident faces, or if there are no faces at all. Normals are taken
    /// from `data` when present (renormalized), otherwise computed as
    /// area-weighted face-normal averages.
    explicit Mesh(MeshData data);

    int vertex_count() const { return static_cast<int>(vertices_.size()); }
    int face_count() const { return static_cast<int>(faces_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    const std::vector<Vec3>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& faces() const { return faces_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<Vec3>& normals() const { return normals_; }

    const Vec3& vertex(int v) const { return vertices_[v]; }
    const std::array<int, 3>& face(int f) const { return faces_[f]; }
    const Edge& edge(int e) const { return edges_[e]; }
    const Vec3& normal(int v) const { return normals_[v]; }

    /// The three canonical edge indices of face f, in the order
    /// (v0,v1),(v1,v2),(v2,v0) of the face's winding.
    const std::array<int, 3>& face_edges(int f) const { return face_edges_[f]; }

    /// Canonical index of the undirected edge {a,b}, or -1.
    int edge_index(int a, int b) const;

    const std::vector<int>& vertex_faces(int v) const { return vertex_faces_[v]; }
    const std::vector<int>& vertex_edges(int v) const { return vertex_edges_[v]; }

    Vec3 face_normal(int f) const;     // unit; zero vector for degenerate faces
    double face_area(int f) const;
    double surface_area() const;
    /// Barycentric (lumped) vertex area: one third of incident face areas.
    double vertex_area(int v) const;

    Vec3 edge_midpoint(int e) const {
        return 0.5 * (vertices_[edges_[e].v0] + vertices_[edges_[e].v1]);
    }
    double edge_length(int e) const {
        return (vertices_[edges_[e].v0] - vertices_[edges_[e].v1]).norm();
    }

    Vec3 centroid() const;

    ValidationReport validate() const;

    /// Connected components over faces (faces sharing an edge are connected).
    /// Returns per-face component labels and the number of components.
    std::pair<std::vector<int>, int> face_components() const;

    /// Boundary loops as ordered vertex cycles, following boundary-edge
    /// direction induced by face winding.
    std::vector<std::vector<int>> boundary_loops() const;

    /// V - E + F.
    int euler_characteristic() const {
        return vertex_count() - edge_count() + face_count();
    }

    /// Copy with vertices moved (connectivity and normals recomputed).
    Mesh with_vertices(std::vector<Vec3> vertices) const;

private:
    std::vector<Vec3> vertices_;
    std::vector<std::array<int, 3>> faces_;
    std::vector<Vec3> normals_;
    std::vector<Edge> edges_;
    std::vector<std::array<int, 3>> face_edges_;
    std::vector<std::vector<int>> vertex_faces_;
    std::vector<std::vector<int>> vertex_edges_;
};

/// Area-weighted vertex normals for raw data (exposed for parsers/tests).
std::vector<Vec3> compute_vertex_normals(const std::vector<Vec3>& vertices,
                                         const std::vector<std::array<int, 3>>& faces);

}  // namespace meshcorr
