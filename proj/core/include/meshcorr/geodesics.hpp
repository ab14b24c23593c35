#pragma once

#include <vector>

#include "meshcorr/mesh.hpp"

namespace meshcorr {

/// Shortest-path graph over mesh vertices plus edge-midpoint Steiner nodes;
/// every pair of nodes sharing a face is linked by its Euclidean length.
/// Weights are quantized to multiples of 2^-30 m so path sums are exact in
/// double precision: distances are bit-identical in both directions and the
/// triangle inequality holds without tolerance.
class SurfaceGraph {
public:
    explicit SurfaceGraph(const Mesh& mesh);

    int vertex_count() const { return vertex_count_; }
    int node_count() const { return static_cast<int>(positions_.size()); }

    /// Distances from a vertex to every node (vertices first, then edge
    /// midpoints). Unreachable nodes report +infinity.
    std::vector<double> distances_from(int source_vertex) const;

private:
    int vertex_count_ = 0;
    std::vector<Vec3> positions_;
    std::vector<int> adj_offsets_;
    std::vector<int> adj_nodes_;
    std::vector<double> adj_weights_;
};

struct GeodesicField {
    std::vector<double> distances;     // per vertex, meters; +inf unreachable
    std::vector<Vec3> face_gradients;  // per face, tangent to the face plane
};

/// Single-source geodesic distances with per-face linear-interpolation
/// gradients. Throws Error("geodesic/source") on a bad index.
GeodesicField geodesic_distances(const Mesh& mesh, int source_vertex);

/// Vertex minimizing the vertex-area-weighted sum of squared geodesic
/// distances to all other vertices; ties go to the lowest index. Throws
/// Error("geodesic/disconnected") when no vertex reaches every other.
int geodesic_center(const Mesh& mesh);

enum class SignalKind {
    GeodesicFromCenter,
    VerticalHeight,
    Random,  // marker: patch orientation is randomized downstream
};

struct SignalField {
    SignalKind kind = SignalKind::GeodesicFromCenter;
    std::vector<double> values;        // per vertex (zeros for Random)
    std::vector<Vec3> face_gradients;  // per face (zeros for Random)
};

SignalField signal_function(const Mesh& mesh, SignalKind kind);

/// In-plane gradient of a per-vertex linear field on each face.
std::vector<Vec3> face_gradients_of(const Mesh& mesh, const std::vector<double>& values);

}  // namespace meshcorr
