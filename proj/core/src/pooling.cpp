#include "meshcorr/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "meshcorr/error.hpp"
#include "meshcorr/mesh_io.hpp"

namespace meshcorr {
namespace {

using Row = std::vector<std::pair<int, double>>;  // (source column, weight), sorted

Row combine_rows(const Row& a, double wa, const Row& b, double wb) {
    Row merged;
    merged.reserve(a.size() + b.size());
    for (const auto& [col, w] : a) merged.emplace_back(col, wa * w);
    for (const auto& [col, w] : b) merged.emplace_back(col, wb * w);
    std::sort(merged.begin(), merged.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    Row out;
    out.reserve(merged.size());
    for (const auto& [col, w] : merged) {
        if (!out.empty() && out.back().first == col) {
            out.back().second += w;
        } else {
            out.emplace_back(col, w);
        }
    }
    return out;
}

void build_support(PoolingMap& map) {
    map.support.assign(map.target_edges, {});
    std::vector<bool> seen(map.source_edges, false);
    for (int r = 0; r < map.weights.outerSize(); ++r) {
        std::vector<int>& sup = map.support[r];
        int best_col = -1;
        double best_w = -1.0;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(map.weights, r); it;
             ++it) {
            seen[it.col()] = true;
            if (it.value() >= 0.1) sup.push_back(static_cast<int>(it.col()));
            if (it.value() > best_w) {
                best_w = it.value();
                best_col = static_cast<int>(it.col());
            }
        }
        if (sup.empty() && best_col >= 0) sup.push_back(best_col);
    }
    map.discarded.clear();
    for (int j = 0; j < map.source_edges; ++j) {
        if (!seen[j]) map.discarded.push_back(j);
    }
}

void normalize_rows(Eigen::SparseMatrix<double, Eigen::RowMajor>& w) {
    for (int r = 0; r < w.outerSize(); ++r) {
        double sum = 0;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(w, r); it; ++it) {
            sum += it.value();
        }
        if (sum <= 0) continue;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(w, r); it; ++it) {
            it.valueRef() /= sum;
        }
    }
}

void put_u32(std::string& s, std::uint32_t v) {
    char b[4];
    std::memcpy(b, &v, 4);
    s.append(b, 4);
}

void put_u64(std::string& s, std::uint64_t v) {
    char b[8];
    std::memcpy(b, &v, 8);
    s.append(b, 8);
}

void put_f32(std::string& s, float v) {
    char b[4];
    std::memcpy(b, &v, 4);
    s.append(b, 4);
}

template <typename T>
T take(const std::string& s, std::size_t& off) {
    if (off + sizeof(T) > s.size()) throw Error("pooling/parse", "truncated pooling map file");
    T v;
    std::memcpy(&v, s.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

}  // namespace

PoolingMap build_pooling_map(const CollapseTrace& trace) {
    const int m = trace.source_edge_count;
    if (m <= 0 || static_cast<int>(trace.final_edge_of_slot.size()) != m) {
        throw Error("pooling/trace", "trace lacks source edges or the final edge mapping");
    }

    std::vector<Row> rows(m);
    for (int i = 0; i < m; ++i) rows[i] = {{i, 1.0}};

    // Each collapse folds the merged-away edge into its survivor with
    // edge-length weights; the collapsed edge itself contracts to a vertex
    // and its feature row drops out (its sources may end up discarded).
    for (const CollapseOp& op : trace.ops) {
        for (int s = 0; s < op.side_count; ++s) {
            const CollapseSide& side = op.sides[s];
            double ws = side.survivor_len;
            double wd = side.merged_len;
            const double tot = ws + wd;
            if (tot > 0) {
                ws /= tot;
                wd /= tot;
            } else {
                ws = wd = 0.5;
            }
            rows[side.survivor] = combine_rows(rows[side.survivor], ws, rows[side.merged_away], wd);
            Row().swap(rows[side.merged_away]);
        }
        Row().swap(rows[op.edge]);
    }

    int n = 0;
    for (int slot = 0; slot < m; ++slot) n = std::max(n, trace.final_edge_of_slot[slot] + 1);
    if (n <= 0) throw Error("pooling/trace", "trace maps no edge to the decimated mesh");

    std::vector<Eigen::Triplet<double>> triplets;
    for (int slot = 0; slot < m; ++slot) {
        const int fin = trace.final_edge_of_slot[slot];
        if (fin < 0) continue;
        double sum = 0;
        for (const auto& [col, w] : rows[slot]) {
            if (w >= 1e-12) sum += w;
        }
        if (sum <= 0) throw Error("pooling/trace", "pooling row collapsed to zero weight");
        for (const auto& [col, w] : rows[slot]) {
            if (w >= 1e-12) triplets.emplace_back(fin, col, w / sum);
        }
    }

    PoolingMap map;
    map.source_edges = m;
    map.target_edges = n;
    map.weights.resize(n, m);
    map.weights.setFromTriplets(triplets.begin(), triplets.end());
    map.weights.makeCompressed();
    map.source_midpoints = trace.source_edge_midpoints;
    build_support(map);
    return map;
}

FeatureMatrix mean_pool(const PoolingMap& map, const FeatureMatrix& f) {
    if (f.rows() != map.source_edges) {
        throw Error("pooling/shape", "feature rows " + std::to_string(f.rows()) +
                                         " do not match source edges " +
                                         std::to_string(map.source_edges));
    }
    return map.weights * f;
}

MaxPoolResult max_pool(const PoolingMap& map, const FeatureMatrix& f) {
    if (f.rows() != map.source_edges) {
        throw Error("pooling/shape", "feature rows " + std::to_string(f.rows()) +
                                         " do not match source edges " +
                                         std::to_string(map.source_edges));
    }
    const int channels = static_cast<int>(f.cols());
    MaxPoolResult out;
    out.values.resize(map.target_edges, channels);
    out.argmax.resize(map.target_edges, channels);
    for (int r = 0; r < map.target_edges; ++r) {
        const std::vector<int>& sup = map.support[r];
        if (sup.empty()) throw Error("pooling/support", "pooling row has no support columns");
        for (int c = 0; c < channels; ++c) {
            int best = sup[0];
            double val = f(sup[0], c);
            for (std::size_t k = 1; k < sup.size(); ++k) {
                if (f(sup[k], c) > val) {
                    val = f(sup[k], c);
                    best = sup[k];
                }
            }
            out.values(r, c) = val;
            out.argmax(r, c) = best;
        }
    }
    return out;
}

FeatureMatrix unpool(const PoolingMap& map, const FeatureMatrix& g) {
    if (g.rows() != map.target_edges) {
        throw Error("pooling/shape", "feature rows " + std::to_string(g.rows()) +
                                         " do not match target edges " +
                                         std::to_string(map.target_edges));
    }
    Eigen::VectorXd colsum = Eigen::VectorXd::Zero(map.source_edges);
    for (int r = 0; r < map.weights.outerSize(); ++r) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(map.weights, r); it;
             ++it) {
            colsum(it.col()) += it.value();
        }
    }
    FeatureMatrix out = FeatureMatrix::Zero(map.source_edges, g.cols());
    for (int r = 0; r < map.weights.outerSize(); ++r) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(map.weights, r); it;
             ++it) {
            out.row(it.col()) += (it.value() / colsum(it.col())) * g.row(r);
        }
    }

    std::vector<int> holes;
    for (int j = 0; j < map.source_edges; ++j) {
        if (colsum(j) == 0.0) holes.push_back(j);
    }
    if (!holes.empty()) {
        if (!map.has_geometry()) {
            throw Error("pooling/geometry",
                        "unpool needs source midpoints to fill unmapped edges; call attach_geometry");
        }
        for (int j : holes) {
            int nearest = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int k = 0; k < map.source_edges; ++k) {
                if (colsum(k) == 0.0) continue;
                const double d = (map.source_midpoints[j] - map.source_midpoints[k]).squaredNorm();
                if (d < best) {
                    best = d;
                    nearest = k;
                }
            }
            if (nearest < 0) throw Error("pooling/support", "pooling map has no populated column");
            out.row(j) = out.row(nearest);
        }
    }
    return out;
}

void attach_geometry(PoolingMap& map, const Mesh& source) {
    if (source.edge_count() != map.source_edges) {
        throw Error("pooling/shape", "mesh edge count does not match the pooling map source side");
    }
    map.source_midpoints.resize(map.source_edges);
    for (int e = 0; e < map.source_edges; ++e) map.source_midpoints[e] = source.edge_midpoint(e);
}

void save_pooling_map(const PoolingMap& map, const std::string& path) {
    std::string buf;
    buf.reserve(16 + static_cast<std::size_t>(map.weights.nonZeros()) * 12);
    put_u32(buf, static_cast<std::uint32_t>(map.source_edges));
    put_u32(buf, static_cast<std::uint32_t>(map.target_edges));
    put_u64(buf, static_cast<std::uint64_t>(map.weights.nonZeros()));
    for (int r = 0; r < map.weights.outerSize(); ++r) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(map.weights, r); it;
             ++it) {
            put_u32(buf, static_cast<std::uint32_t>(it.row()));
            put_u32(buf, static_cast<std::uint32_t>(it.col()));
            put_f32(buf, static_cast<float>(it.value()));
        }
    }
    write_file(path, buf);
}

PoolingMap load_pooling_map(const std::string& path) {
    const std::string buf = read_file(path);
    std::size_t off = 0;
    PoolingMap map;
    map.source_edges = static_cast<int>(take<std::uint32_t>(buf, off));
    map.target_edges = static_cast<int>(take<std::uint32_t>(buf, off));
    const std::uint64_t nnz = take<std::uint64_t>(buf, off);
    if (map.source_edges <= 0 || map.target_edges <= 0) {
        throw Error("pooling/parse", "pooling map header has empty dimensions");
    }
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(nnz);
    for (std::uint64_t k = 0; k < nnz; ++k) {
        const auto row = take<std::uint32_t>(buf, off);
        const auto col = take<std::uint32_t>(buf, off);
        const auto w = take<float>(buf, off);
        if (row >= static_cast<std::uint32_t>(map.target_edges) ||
            col >= static_cast<std::uint32_t>(map.source_edges)) {
            throw Error("pooling/parse", "pooling map entry out of range");
        }
        if (w >= 1e-12f) triplets.emplace_back(row, col, static_cast<double>(w));
    }
    if (off != buf.size()) throw Error("pooling/parse", "trailing bytes in pooling map file");
    map.weights.resize(map.target_edges, map.source_edges);
    map.weights.setFromTriplets(triplets.begin(), triplets.end());
    map.weights.makeCompressed();
    normalize_rows(map.weights);
    build_support(map);
    return map;
}

}  // namespace meshcorr
