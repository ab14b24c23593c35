#pragma once

#include <vector>

#include "meshcorr/decimate.hpp"
#include "meshcorr/mesh.hpp"

namespace meshcorr {

/// Deletes the smallest-area faces on any edge with more than two incident
/// faces until at most two remain. Returns the number of faces removed.
int repair_nonmanifold_edges(MeshData& data);

/// Deletes the smaller fans at vertices whose incident faces form more than
/// one fan (keeps the largest total-area fan). Returns faces removed.
int repair_vertex_fans(MeshData& data);

/// Keeps only the connected component with the largest surface area.
void keep_largest_component(MeshData& data);

/// Drops vertices referenced by no face; returns old->new index map (-1 for
/// removed vertices). Preserves relative order.
std::vector<int> remove_unreferenced_vertices(MeshData& data);

struct PreprocessResult {
    Mesh mesh;
    /// Decimation trace from the repaired full-resolution mesh down to
    /// `mesh`; empty when no decimation was needed.
    CollapseTrace trace;
    /// Old->new vertex map from the raw input into the repaired mesh.
    std::vector<int> vertex_map;
};

/// Scan cleanup: repair non-manifold edges and vertex fans, keep the
/// largest component, drop unreferenced vertices, then decimate to exactly
/// target_edges. The result is a valid (open or closed) manifold.
PreprocessResult preprocess_scan(const MeshData& raw, int target_edges);

/// Convenience overload for already-valid meshes.
PreprocessResult preprocess_scan(const Mesh& mesh, int target_edges);

/// As preprocess_scan but returning only the mesh.
Mesh preprocess(const Mesh& mesh, int target_edges);

/// Per-edge input features, m x 6: edge midpoint (3) and the renormalized
/// mean of the endpoint normals (3). When the endpoint normals cancel, the
/// first incident face normal stands in; if that is degenerate too, throws.
FeatureMatrix edge_features(const Mesh& mesh);

}  // namespace meshcorr
