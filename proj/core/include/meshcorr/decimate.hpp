#pragma once

#include <vector>

#include "meshcorr/mesh.hpp"

namespace meshcorr {

/// One side of an edge collapse: the face removed on that side and the two
/// incident edges that merge into one. Edge "slots" are stable ids: original
/// canonical edge indices; a merge keeps the lower slot id.
struct CollapseSide {
    int removed_face = -1;
    int survivor = -1;       // surviving edge slot
    int merged_away = -1;    // slot folded into the survivor
    double survivor_len = 0; // pre-collapse lengths (pooling weights)
    double merged_len = 0;
};

struct CollapseOp {
    int edge = -1;         // slot of the collapsed edge
    int kept_vertex = -1;  // surviving vertex slot
    int gone_vertex = -1;
    Vec3 new_position = Vec3::Zero();
    double edge_len = 0;   // pre-collapse length of the collapsed edge
    int side_count = 0;    // 1 for a boundary-edge collapse, else 2
    CollapseSide sides[2];
};

/// Ordered record of edge collapses from a source mesh down to a target.
/// Replaying the ops on the source mesh reproduces the target exactly.
struct CollapseTrace {
    int source_vertex_count = 0;
    int source_edge_count = 0;
    std::vector<Vec3> source_edge_midpoints;
    std::vector<CollapseOp> ops;

    /// Source slot -> canonical edge index in the decimated mesh (-1 dead).
    std::vector<int> final_edge_of_slot;
    /// Source vertex -> final vertex index (-1 dead).
    std::vector<int> final_vertex_of_slot;
    /// Final vertex -> representative source vertex (nearest surviving
    /// parent at each merge; ties to the lower id).
    std::vector<int> source_vertex_of_final;

    bool empty() const { return ops.empty(); }
};

struct DecimationResult {
    Mesh mesh;
    CollapseTrace trace;
};

/// Quadric-error-metric decimation down to exactly `target_edges` edges.
///
/// Costs are the quadric form at the optimal contraction point (midpoint
/// fallback when the 3x3 system has condition number > 1e8 or is singular);
/// collapses apply in min-cost order with ties to the lower edge slot,
/// skipping any collapse that would break the manifold link condition or
/// rotate a surviving face normal by more than 90 degrees. Boundary
/// polylines are pinned: a mixed interior edge contracts to its boundary
/// endpoint, and boundary planes contribute penalty quadrics.
///
/// Throws Error("decimate/floor", ...) when no legal collapse remains above
/// the target, and Error("decimate/target", ...) for target_edges < 6.
DecimationResult qslim_decimate(const Mesh& mesh, int target_edges);

/// Applies a recorded trace to its source mesh (no cost evaluation).
Mesh replay_collapses(const Mesh& source, const CollapseTrace& trace);

}  // namespace meshcorr
