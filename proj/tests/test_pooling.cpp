#include <cmath>
#include <cstdio>
#include <vector>

#include "doctest.h"
#include "meshcorr/decimate.hpp"
#include "meshcorr/pooling.hpp"
#include "meshcorr/primitives.hpp"
#include "meshcorr/rng.hpp"

using namespace meshcorr;

namespace {

Mesh jittered_sphere(std::uint64_t seed, double amount = 0.05) {
    Mesh sphere = make_icosphere(2);
    Rng rng(seed);
    std::vector<Vec3> moved = sphere.vertices();
    for (Vec3& v : moved) v *= 1.0 + amount * (rng.uniform() - 0.5);
    return sphere.with_vertices(moved);
}

FeatureMatrix random_features(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    FeatureMatrix f(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) f(r, c) = rng.uniform(-2.0, 2.0);
    }
    return f;
}

// Step-by-step replay of the per-collapse averaging; deliberately does not
// touch the sparse-matrix composition it is checking.
FeatureMatrix pooled_by_replay(const CollapseTrace& trace, const FeatureMatrix& f) {
    std::vector<Eigen::RowVectorXd> rows(trace.source_edge_count);
    for (int i = 0; i < trace.source_edge_count; ++i) rows[i] = f.row(i);
    for (const CollapseOp& op : trace.ops) {
        for (int s = 0; s < op.side_count; ++s) {
            const CollapseSide& side = op.sides[s];
            const double tot = side.survivor_len + side.merged_len;
            if (tot > 0) {
                rows[side.survivor] = (side.survivor_len * rows[side.survivor] +
                                       side.merged_len * rows[side.merged_away]) /
                                      tot;
            } else {
                rows[side.survivor] =
                    0.5 * (rows[side.survivor] + rows[side.merged_away]);
            }
        }
    }
    int n = 0;
    for (int fin : trace.final_edge_of_slot) n = std::max(n, fin + 1);
    FeatureMatrix out(n, f.cols());
    for (int slot = 0; slot < trace.source_edge_count; ++slot) {
        const int fin = trace.final_edge_of_slot[slot];
        if (fin >= 0) out.row(fin) = rows[slot];
    }
    return out;
}

// A hand-written trace: one collapse merging source edges 0 and 1; edge 2
// contracts away entirely.
CollapseTrace tiny_trace(double len0, double len1) {
    CollapseTrace trace;
    trace.source_vertex_count = 4;
    trace.source_edge_count = 3;
    trace.source_edge_midpoints = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, 0.5, 0)};
    CollapseOp op;
    op.edge = 2;
    op.kept_vertex = 0;
    op.gone_vertex = 1;
    op.edge_len = 1.0;
    op.side_count = 1;
    op.sides[0].removed_face = 0;
    op.sides[0].survivor = 0;
    op.sides[0].merged_away = 1;
    op.sides[0].survivor_len = len0;
    op.sides[0].merged_len = len1;
    trace.ops.push_back(op);
    trace.final_edge_of_slot = {0, -1, -1};
    trace.final_vertex_of_slot = {0, -1, 1, 2};
    trace.source_vertex_of_final = {0, 2, 3};
    return trace;
}

}  // namespace

TEST_CASE("empty trace yields the identity pooling map") {
    Mesh sphere = make_icosphere(1);
    DecimationResult result = qslim_decimate(sphere, sphere.edge_count());
    PoolingMap map = build_pooling_map(result.trace);
    CHECK(map.source_edges == sphere.edge_count());
    CHECK(map.target_edges == sphere.edge_count());
    CHECK(map.weights.nonZeros() == sphere.edge_count());
    CHECK(map.discarded.empty());
    FeatureMatrix f = random_features(sphere.edge_count(), 4, 3);
    CHECK((mean_pool(map, f) - f).cwiseAbs().maxCoeff() == 0.0);
    CHECK((max_pool(map, f).values - f).cwiseAbs().maxCoeff() == 0.0);
    CHECK((unpool(map, f) - f).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("merging two equal-length edges gives a row with two 0.5 entries") {
    PoolingMap map = build_pooling_map(tiny_trace(1.0, 1.0));
    CHECK(map.target_edges == 1);
    CHECK(map.weights.nonZeros() == 2);
    CHECK(map.weights.coeff(0, 0) == doctest::Approx(0.5));
    CHECK(map.weights.coeff(0, 1) == doctest::Approx(0.5));
    // The contracted edge's feature has no surviving image.
    REQUIRE(map.discarded.size() == 1);
    CHECK(map.discarded[0] == 2);
}

TEST_CASE("merge weights follow pre-collapse edge lengths") {
    PoolingMap map = build_pooling_map(tiny_trace(3.0, 1.0));
    CHECK(map.weights.coeff(0, 0) == doctest::Approx(0.75));
    CHECK(map.weights.coeff(0, 1) == doctest::Approx(0.25));
}

TEST_CASE("pooling rows sum to one with entries in [0,1]") {
    for (std::uint64_t seed : {21ull, 22ull}) {
        Mesh source = jittered_sphere(seed);
        DecimationResult result = qslim_decimate(source, 120);
        PoolingMap map = build_pooling_map(result.trace);
        for (int r = 0; r < map.weights.outerSize(); ++r) {
            double sum = 0;
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(map.weights, r);
                 it; ++it) {
                CHECK(it.value() >= 0.0);
                CHECK(it.value() <= 1.0);
                sum += it.value();
            }
            CHECK(std::abs(sum - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("mean pooling equals brute-force trace replay") {
    for (std::uint64_t seed : {31ull, 32ull, 33ull}) {
        Mesh source = jittered_sphere(seed);
        DecimationResult result = qslim_decimate(source, 150);
        PoolingMap map = build_pooling_map(result.trace);
        FeatureMatrix f = random_features(source.edge_count(), 6, seed * 7);
        FeatureMatrix fast = mean_pool(map, f);
        FeatureMatrix slow = pooled_by_replay(result.trace, f);
        REQUIRE(fast.rows() == slow.rows());
        CHECK((fast - slow).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("max pooling equals an exhaustive scan over thresholded support") {
    Mesh source = jittered_sphere(41);
    DecimationResult result = qslim_decimate(source, 150);
    PoolingMap map = build_pooling_map(result.trace);
    FeatureMatrix f = random_features(source.edge_count(), 5, 17);
    MaxPoolResult got = max_pool(map, f);
    for (int r = 0; r < map.target_edges; ++r) {
        // Recompute the support directly from the weights.
        std::vector<int> support;
        int argmax_w = -1;
        double max_w = -1;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(map.weights, r); it;
             ++it) {
            if (it.value() >= 0.1) support.push_back(static_cast<int>(it.col()));
            if (it.value() > max_w) {
                max_w = it.value();
                argmax_w = static_cast<int>(it.col());
            }
        }
        if (support.empty()) support.push_back(argmax_w);
        for (int c = 0; c < f.cols(); ++c) {
            double best = -1e300;
            int best_col = -1;
            for (int col : support) {
                if (f(col, c) > best) {
                    best = f(col, c);
                    best_col = col;
                }
            }
            CHECK(got.values(r, c) == best);
            CHECK(got.argmax(r, c) == best_col);
        }
    }
}

TEST_CASE("pooling operators are linear and preserve constants") {
    Mesh source = jittered_sphere(51);
    DecimationResult result = qslim_decimate(source, 240);
    PoolingMap map = build_pooling_map(result.trace);

    FeatureMatrix ones = FeatureMatrix::Constant(map.source_edges, 3, 2.5);
    CHECK((mean_pool(map, ones).array() - 2.5).abs().maxCoeff() <= 1e-9);
    CHECK((max_pool(map, ones).values.array() - 2.5).abs().maxCoeff() <= 1e-9);

    FeatureMatrix coarse_ones = FeatureMatrix::Constant(map.target_edges, 3, -1.25);
    CHECK((unpool(map, coarse_ones).array() + 1.25).abs().maxCoeff() <= 1e-9);
    CHECK((unpool(map, mean_pool(map, ones)).array() - 2.5).abs().maxCoeff() <= 1e-9);

    FeatureMatrix f = random_features(map.source_edges, 3, 5);
    FeatureMatrix g = random_features(map.source_edges, 3, 6);
    const double alpha = 0.37;
    FeatureMatrix lhs = mean_pool(map, alpha * f + g);
    FeatureMatrix rhs = alpha * mean_pool(map, f) + mean_pool(map, g);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9);

    FeatureMatrix cf = random_features(map.target_edges, 3, 7);
    FeatureMatrix cg = random_features(map.target_edges, 3, 8);
    FeatureMatrix ulhs = unpool(map, alpha * cf + cg);
    FeatureMatrix urhs = alpha * unpool(map, cf) + unpool(map, cg);
    CHECK((ulhs - urhs).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("discarded source edges inherit the nearest mapped edge on unpool") {
    PoolingMap map = build_pooling_map(tiny_trace(1.0, 1.0));
    FeatureMatrix g(1, 2);
    g << 4.0, -2.0;
    FeatureMatrix fine = unpool(map, g);
    REQUIRE(fine.rows() == 3);
    CHECK(fine(0, 0) == doctest::Approx(4.0));
    CHECK(fine(1, 0) == doctest::Approx(4.0));
    // Edge 2 is discarded; it copies its geometrically nearest mapped edge.
    CHECK(fine(2, 0) == doctest::Approx(4.0));
    CHECK(fine(2, 1) == doctest::Approx(-2.0));
}

TEST_CASE("pooling map serialization round-trips") {
    Mesh source = jittered_sphere(61);
    DecimationResult result = qslim_decimate(source, 150);
    PoolingMap map = build_pooling_map(result.trace);
    const std::string path = "pooling_tmp.bin";
    save_pooling_map(map, path);
    PoolingMap back = load_pooling_map(path);
    std::remove(path.c_str());

    CHECK(back.source_edges == map.source_edges);
    CHECK(back.target_edges == map.target_edges);
    CHECK(back.weights.nonZeros() == map.weights.nonZeros());
    CHECK(back.support == map.support);
    CHECK(back.discarded == map.discarded);
    for (int r = 0; r < map.weights.outerSize(); ++r) {
        double sum = 0;
        Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator ita(map.weights, r);
        Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator itb(back.weights, r);
        for (; ita && itb; ++ita, ++itb) {
            CHECK(ita.col() == itb.col());
            CHECK(std::abs(ita.value() - itb.value()) <= 1e-6);
            sum += itb.value();
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }

    // Loaded maps have no geometry until it is attached.
    CHECK_FALSE(back.has_geometry());
    attach_geometry(back, source);
    CHECK(back.has_geometry());
}
