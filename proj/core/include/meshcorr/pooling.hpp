#pragma once

#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "meshcorr/decimate.hpp"
#include "meshcorr/mesh.hpp"

namespace meshcorr {

/// Sparse map from source-mesh edge features to decimated-mesh edge
/// features. Row i lists the source edges absorbed into coarse edge i with
/// length-derived weights; every row sums to 1.
struct PoolingMap {
    int source_edges = 0;
    int target_edges = 0;
    Eigen::SparseMatrix<double, Eigen::RowMajor> weights;  // target x source
    /// Per row: source columns with weight >= 0.1 (argmax column when none
    /// clears the threshold), ascending.
    std::vector<std::vector<int>> support;
    /// Source edges that survive in no row (collapsed away entirely).
    std::vector<int> discarded;
    /// Source edge midpoints; used to resolve unpool rows whose column in
    /// the map carries no weight. Empty for maps loaded from disk until
    /// attach_geometry() is called.
    std::vector<Vec3> source_midpoints;

    bool has_geometry() const {
        return static_cast<int>(source_midpoints.size()) == source_edges;
    }
};

/// Builds the pooling map from a collapse trace. Each collapse merges two
/// edge pairs; the surviving edge's row becomes the pre-collapse
/// length-weighted average of the pair's rows. The collapsed edge contracts
/// to a vertex, so its row drops out; source edges whose entire weight
/// vanishes this way are listed in `discarded`. Rows renormalize to 1.
PoolingMap build_pooling_map(const CollapseTrace& trace);

/// weights * f  (target_edges x channels).
FeatureMatrix mean_pool(const PoolingMap& map, const FeatureMatrix& f);

struct MaxPoolResult {
    FeatureMatrix values;    // target_edges x channels
    Eigen::MatrixXi argmax;  // source row chosen per entry (ties: lowest)
};

/// Channel-wise max over each row's support set.
MaxPoolResult max_pool(const PoolingMap& map, const FeatureMatrix& f);

/// Transpose-distribute coarse features back to source edges; each source
/// row is the column-normalized transpose applied to g. Source edges with
/// an all-zero column copy the nearest (by midpoint) source edge that has
/// weight; requires geometry.
FeatureMatrix unpool(const PoolingMap& map, const FeatureMatrix& g);

/// Fills source_midpoints from the mesh the map was built over.
void attach_geometry(PoolingMap& map, const Mesh& source);

/// Binary format: u32 source_edges, u32 target_edges, u64 nnz, then nnz
/// triplets (u32 row, u32 col, f32 weight) in row-major order.
void save_pooling_map(const PoolingMap& map, const std::string& path);
PoolingMap load_pooling_map(const std::string& path);

}  // namespace meshcorr
