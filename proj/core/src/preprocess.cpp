#include "meshcorr/preprocess.hpp"

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "meshcorr/error.hpp"

namespace meshcorr {
namespace {

std::uint64_t pair_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double face_area(const MeshData& data, const std::array<int, 3>& f) {
    const Vec3& a = data.vertices[f[0]];
    return 0.5 * (data.vertices[f[1]] - a).cross(data.vertices[f[2]] - a).norm();
}

void check_face_indices(const MeshData& data) {
    const int n = static_cast<int>(data.vertices.size());
    for (std::size_t i = 0; i < data.faces.size(); ++i) {
        for (int v : data.faces[i]) {
            if (v < 0 || v >= n) {
                throw Error("mesh/face-index", "face " + std::to_string(i) +
                                                   " references vertex " + std::to_string(v) +
                                                   " outside [0, " + std::to_string(n) + ")");
            }
        }
    }
}

int drop_degenerate_faces(MeshData& data) {
    std::vector<std::array<int, 3>> kept;
    kept.reserve(data.faces.size());
    for (const auto& f : data.faces) {
        if (f[0] != f[1] && f[1] != f[2] && f[0] != f[2]) kept.push_back(f);
    }
    const int removed = static_cast<int>(data.faces.size() - kept.size());
    data.faces = std::move(kept);
    return removed;
}

int apply_face_mask(MeshData& data, const std::vector<bool>& keep) {
    std::vector<std::array<int, 3>> kept;
    kept.reserve(data.faces.size());
    for (std::size_t i = 0; i < data.faces.size(); ++i) {
        if (keep[i]) kept.push_back(data.faces[i]);
    }
    const int removed = static_cast<int>(data.faces.size() - kept.size());
    data.faces = std::move(kept);
    return removed;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) {
        for (int i = 0; i < n; ++i) parent[i] = i;
    }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

int repair_nonmanifold_edges(MeshData& data) {
    check_face_indices(data);
    std::unordered_map<std::uint64_t, std::vector<int>> edge_faces;
    for (std::size_t i = 0; i < data.faces.size(); ++i) {
        const auto& f = data.faces[i];
        for (int k = 0; k < 3; ++k) {
            edge_faces[pair_key(f[k], f[(k + 1) % 3])].push_back(static_cast<int>(i));
        }
    }
    std::vector<std::uint64_t> overfull;
    for (const auto& [key, faces] : edge_faces) {
        if (faces.size() > 2) overfull.push_back(key);
    }
    if (overfull.empty()) return 0;
    std::sort(overfull.begin(), overfull.end());

    std::vector<bool> keep(data.faces.size(), true);
    for (std::uint64_t key : overfull) {
        std::vector<int>& live = edge_faces[key];
        while (true) {
            int count = 0;
            for (int fid : live) count += keep[fid] ? 1 : 0;
            if (count <= 2) break;
            int victim = -1;
            double victim_area = 0;
            for (int fid : live) {
                if (!keep[fid]) continue;
                const double area = face_area(data, data.faces[fid]);
                if (victim < 0 || area < victim_area ||
                    (area == victim_area && fid < victim)) {
                    victim = fid;
                    victim_area = area;
                }
            }
            keep[victim] = false;
        }
    }
    return apply_face_mask(data, keep);
}

int repair_vertex_fans(MeshData& data) {
    check_face_indices(data);
    int removed_total = 0;
    while (true) {
        // Faces around each vertex, then fans joined through shared edges.
        std::vector<std::vector<std::pair<int, int>>> incident(data.vertices.size());
        std::unordered_map<std::uint64_t, std::vector<int>> edge_faces;
        for (std::size_t i = 0; i < data.faces.size(); ++i) {
            const auto& f = data.faces[i];
            for (int k = 0; k < 3; ++k) {
                edge_faces[pair_key(f[k], f[(k + 1) % 3])].push_back(static_cast<int>(i));
            }
            for (int v : f) incident[v].push_back({static_cast<int>(i), 0});
        }

        std::vector<bool> keep(data.faces.size(), true);
        bool changed = false;
        for (std::size_t v = 0; v < data.vertices.size(); ++v) {
            auto& faces = incident[v];
            if (faces.size() < 2) continue;
            std::unordered_map<int, int> local;  // face id -> local index
            for (std::size_t k = 0; k < faces.size(); ++k) local[faces[k].first] = static_cast<int>(k);
            UnionFind uf(static_cast<int>(faces.size()));
            for (auto& [fid, slot] : faces) {
                const auto& f = data.faces[fid];
                for (int k = 0; k < 3; ++k) {
                    const int a = f[k];
                    const int b = f[(k + 1) % 3];
                    if (a != static_cast<int>(v) && b != static_cast<int>(v)) continue;
                    for (int other : edge_faces[pair_key(a, b)]) {
                        auto it = local.find(other);
                        if (it != local.end()) uf.unite(local[fid], it->second);
                    }
                }
            }
            // Pick the fan with the largest area (ties: the one holding the
            // lowest face id) and drop the rest.
            std::unordered_map<int, double> area_of_root;
            std::unordered_map<int, int> min_face_of_root;
            int roots = 0;
            for (std::size_t k = 0; k < faces.size(); ++k) {
                const int root = uf.find(static_cast<int>(k));
                const int fid = faces[k].first;
                if (!area_of_root.count(root)) {
                    ++roots;
                    area_of_root[root] = 0;
                    min_face_of_root[root] = fid;
                }
                area_of_root[root] += face_area(data, data.faces[fid]);
                min_face_of_root[root] = std::min(min_face_of_root[root], fid);
            }
            if (roots <= 1) continue;
            int best_root = -1;
            for (const auto& [root, area] : area_of_root) {
                if (best_root < 0 || area > area_of_root[best_root] ||
                    (area == area_of_root[best_root] &&
                     min_face_of_root[root] < min_face_of_root[best_root])) {
                    best_root = root;
                }
            }
            for (std::size_t k = 0; k < faces.size(); ++k) {
                if (uf.find(static_cast<int>(k)) != best_root && keep[faces[k].first]) {
                    keep[faces[k].first] = false;
                    changed = true;
                }
            }
        }
        if (!changed) break;
        removed_total += apply_face_mask(data, keep);
    }
    return removed_total;
}

void keep_largest_component(MeshData& data) {
    check_face_indices(data);
    if (data.faces.empty()) return;
    std::unordered_map<std::uint64_t, std::vector<int>> edge_faces;
    for (std::size_t i = 0; i < data.faces.size(); ++i) {
        const auto& f = data.faces[i];
        for (int k = 0; k < 3; ++k) {
            edge_faces[pair_key(f[k], f[(k + 1) % 3])].push_back(static_cast<int>(i));
        }
    }
    UnionFind uf(static_cast<int>(data.faces.size()));
    for (const auto& [key, faces] : edge_faces) {
        for (std::size_t k = 1; k < faces.size(); ++k) uf.unite(faces[0], faces[k]);
    }
    std::unordered_map<int, double> area_of_root;
    std::unordered_map<int, int> min_face_of_root;
    for (std::size_t i = 0; i < data.faces.size(); ++i) {
        const int root = uf.find(static_cast<int>(i));
        if (!area_of_root.count(root)) {
            area_of_root[root] = 0;
            min_face_of_root[root] = static_cast<int>(i);
        }
        area_of_root[root] += face_area(data, data.faces[i]);
    }
    int best_root = -1;
    for (const auto& [root, area] : area_of_root) {
        if (best_root < 0 || area > area_of_root[best_root] ||
            (area == area_of_root[best_root] &&
             min_face_of_root[root] < min_face_of_root[best_root])) {
            best_root = root;
        }
    }
    std::vector<bool> keep(data.faces.size(), false);
    for (std::size_t i = 0; i < data.faces.size(); ++i) {
        keep[i] = uf.find(static_cast<int>(i)) == best_root;
    }
    apply_face_mask(data, keep);
}

std::vector<int> remove_unreferenced_vertices(MeshData& data) {
    std::vector<bool> used(data.vertices.size(), false);
    for (const auto& f : data.faces) {
        for (int v : f) used[v] = true;
    }
    std::vector<int> map(data.vertices.size(), -1);
    std::vector<Vec3> vertices;
    std::vector<Vec3> normals;
    const bool has_normals = data.normals.size() == data.vertices.size();
    for (std::size_t i = 0; i < data.vertices.size(); ++i) {
        if (!used[i]) continue;
        map[i] = static_cast<int>(vertices.size());
        vertices.push_back(data.vertices[i]);
        if (has_normals) normals.push_back(data.normals[i]);
    }
    for (auto& f : data.faces) {
        for (int& v : f) v = map[v];
    }
    data.vertices = std::move(vertices);
    data.normals = std::move(normals);
    return map;
}

PreprocessResult preprocess_scan(const MeshData& raw, int target_edges) {
    if (raw.vertices.empty() || raw.faces.empty()) {
        throw Error("mesh/empty", "mesh has no vertices or faces");
    }
    MeshData data = raw;
    check_face_indices(data);
    drop_degenerate_faces(data);
    repair_nonmanifold_edges(data);
    repair_vertex_fans(data);
    keep_largest_component(data);
    std::vector<int> vertex_map = remove_unreferenced_vertices(data);
    if (data.faces.empty()) throw Error("mesh/empty", "no faces survive preprocessing");

    Mesh repaired(std::move(data));
    const ValidationReport report = repaired.validate();
    if (!report.manifold()) {
        throw Error("preprocess/manifold",
                    report.issues.empty() ? "repair left a non-manifold mesh" : report.issues.front());
    }
    DecimationResult dec = qslim_decimate(repaired, target_edges);
    return {std::move(dec.mesh), std::move(dec.trace), std::move(vertex_map)};
}

PreprocessResult preprocess_scan(const Mesh& mesh, int target_edges) {
    MeshData data;
    data.vertices.reserve(mesh.vertex_count());
    for (int i = 0; i < mesh.vertex_count(); ++i) data.vertices.push_back(mesh.vertex(i));
    data.faces.reserve(mesh.face_count());
    for (int f = 0; f < mesh.face_count(); ++f) data.faces.push_back(mesh.face(f));
    std::vector<Vec3> normals;
    normals.reserve(mesh.vertex_count());
    for (int i = 0; i < mesh.vertex_count(); ++i) normals.push_back(mesh.normal(i));
    data.normals = std::move(normals);
    return preprocess_scan(data, target_edges);
}

Mesh preprocess(const Mesh& mesh, int target_edges) {
    return preprocess_scan(mesh, target_edges).mesh;
}

FeatureMatrix edge_features(const Mesh& mesh) {
    FeatureMatrix out(mesh.edge_count(), 6);
    for (int e = 0; e < mesh.edge_count(); ++e) {
        const Edge& edge = mesh.edge(e);
        const Vec3 mid = mesh.edge_midpoint(e);
        Vec3 n = mesh.normal(edge.v0) + mesh.normal(edge.v1);
        const double len = n.norm();
        if (len > 1e-12) {
            n /= len;
        } else {
            // Endpoint normals cancel; borrow the flanking face's normal.
            const auto& f = mesh.face(edge.f0);
            const Vec3 cr = (mesh.vertex(f[1]) - mesh.vertex(f[0]))
                                .cross(mesh.vertex(f[2]) - mesh.vertex(f[0]));
            if (cr.norm() < 1e-18) {
                throw Error("features/normal",
                            "edge " + std::to_string(e) + " has cancelling endpoint normals and a "
                            "degenerate incident face");
            }
            n = cr.normalized();
        }
        out(e, 0) = mid.x();
        out(e, 1) = mid.y();
        out(e, 2) = mid.z();
        out(e, 3) = n.x();
        out(e, 4) = n.y();
        out(e, 5) = n.z();
    }
    return out;
}

}  // namespace meshcorr
