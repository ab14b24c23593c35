#include "meshcorr/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <unordered_map>

namespace meshcorr {

namespace {

inline std::uint64_t pair_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

}  // namespace

std::vector<Vec3> compute_vertex_normals(const std::vector<Vec3>& vertices,
                                         const std::vector<std::array<int, 3>>& faces) {
    std::vector<Vec3> normals(vertices.size(), Vec3::Zero());
    for (const auto& f : faces) {
        Vec3 n = (vertices[f[1]] - vertices[f[0]]).cross(vertices[f[2]] - vertices[f[0]]);
        // |n| = 2 * face area, so plain accumulation is area weighting.
        normals[f[0]] += n;
        normals[f[1]] += n;
        normals[f[2]] += n;
    }
    for (auto& n : normals) {
        double len = n.norm();
        if (len > 1e-20) n /= len;
    }
    return normals;
}

Mesh::Mesh(MeshData data) {
    if (data.faces.empty()) throw Error("mesh/empty", "mesh has no faces");

    const int nv = static_cast<int>(data.vertices.size());
    for (std::size_t fi = 0; fi < data.faces.size(); ++fi) {
        const auto& f = data.faces[fi];
        for (int k = 0; k < 3; ++k) {
            if (f[k] < 0 || f[k] >= nv)
                throw Error("mesh/face-index",
                            "face " + std::to_string(fi) + " references vertex " +
                                std::to_string(f[k]) + " out of range");
        }
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
            throw Error("mesh/degenerate-face",
                        "face " + std::to_string(fi) + " repeats a vertex index");
    }

    vertices_ = std::move(data.vertices);
    faces_ = std::move(data.faces);

    std::unordered_map<std::uint64_t, int> edge_of;
    edge_of.reserve(faces_.size() * 3);
    std::vector<Edge> edges;
    edges.reserve(faces_.size() * 3 / 2);
    for (int fi = 0; fi < face_count(); ++fi) {
        const auto& f = faces_[fi];
        for (int k = 0; k < 3; ++k) {
            int a = f[k], b = f[(k + 1) % 3];
            auto key = pair_key(a, b);
            auto it = edge_of.find(key);
            if (it == edge_of.end()) {
                Edge e;
                e.v0 = std::min(a, b);
                e.v1 = std::max(a, b);
                e.f0 = fi;
                edge_of.emplace(key, static_cast<int>(edges.size()));
                edges.push_back(e);
            } else {
                Edge& e = edges[it->second];
                if (e.f1 >= 0)
                    throw Error("mesh/nonmanifold-edge",
                                "edge (" + std::to_string(e.v0) + "," + std::to_string(e.v1) +
                                    ") has more than two incident faces");
                e.f1 = fi;
            }
        }
    }

    // Canonical order: sort by (v0, v1).
    std::vector<int> order(edges.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (edges[a].v0 != edges[b].v0) return edges[a].v0 < edges[b].v0;
        return edges[a].v1 < edges[b].v1;
    });
    edges_.resize(edges.size());
    std::vector<int> rank(edges.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        edges_[i] = edges[order[i]];
        rank[order[i]] = static_cast<int>(i);
    }

    face_edges_.resize(faces_.size());
    for (int fi = 0; fi < face_count(); ++fi) {
        const auto& f = faces_[fi];
        for (int k = 0; k < 3; ++k) {
            int a = f[k], b = f[(k + 1) % 3];
            face_edges_[fi][k] = rank[edge_of.at(pair_key(a, b))];
        }
    }

    vertex_faces_.assign(vertices_.size(), {});
    for (int fi = 0; fi < face_count(); ++fi)
        for (int k = 0; k < 3; ++k) vertex_faces_[faces_[fi][k]].push_back(fi);
    vertex_edges_.assign(vertices_.size(), {});
    for (int ei = 0; ei < edge_count(); ++ei) {
        vertex_edges_[edges_[ei].v0].push_back(ei);
        vertex_edges_[edges_[ei].v1].push_back(ei);
    }

    if (data.normals.empty()) {
        normals_ = compute_vertex_normals(vertices_, faces_);
    } else {
        if (data.normals.size() != vertices_.size())
            throw Error("mesh/normals", "normal count does not match vertex count");
        normals_ = std::move(data.normals);
        for (std::size_t i = 0; i < normals_.size(); ++i) {
            double len = normals_[i].norm();
            if (len > 1e-12) {
                normals_[i] /= len;
            } else {
                // Zero normal in the file: recompute this one from geometry.
                normals_[i] = compute_vertex_normals(vertices_, faces_)[i];
            }
        }
    }
}

int Mesh::edge_index(int a, int b) const {
    if (a > b) std::swap(a, b);
    // Binary search over the canonical order.
    int lo = 0, hi = edge_count() - 1;
    while (lo <= hi) {
        int mid = (lo + hi) / 2;
        const Edge& e = edges_[mid];
        if (e.v0 == a && e.v1 == b) return mid;
        if (e.v0 < a || (e.v0 == a && e.v1 < b))
            lo = mid + 1;
        else
            hi = mid - 1;
    }
    return -1;
}

Vec3 Mesh::face_normal(int f) const {
    const auto& t = faces_[f];
    Vec3 n = (vertices_[t[1]] - vertices_[t[0]]).cross(vertices_[t[2]] - vertices_[t[0]]);
    double len = n.norm();
    if (len < 1e-20) return Vec3::Zero();
    return n / len;
}

double Mesh::face_area(int f) const {
    const auto& t = faces_[f];
    return 0.5 *
           (vertices_[t[1]] - vertices_[t[0]]).cross(vertices_[t[2]] - vertices_[t[0]]).norm();
}

double Mesh::surface_area() const {
    double a = 0.0;
    for (int f = 0; f < face_count(); ++f) a += face_area(f);
    return a;
}

double Mesh::vertex_area(int v) const {
    double a = 0.0;
    for (int f : vertex_faces_[v]) a += face_area(f);
    return a / 3.0;
}

Vec3 Mesh::centroid() const {
    Vec3 c = Vec3::Zero();
    for (const auto& v : vertices_) c += v;
    return c / static_cast<double>(vertices_.size());
}

ValidationReport Mesh::validate() const {
    ValidationReport rep;

    for (const Edge& e : edges_) {
        if (e.boundary()) {
            rep.closed = false;
            break;
        }
    }

    // Orientation: each interior edge must be traversed once in each
    // direction by its two faces.
    for (int ei = 0; ei < edge_count() && rep.oriented; ++ei) {
        const Edge& e = edges_[ei];
        if (e.boundary()) continue;
        auto direction = [&](int f) {
            const auto& t = faces_[f];
            for (int k = 0; k < 3; ++k)
                if (t[k] == e.v0 && t[(k + 1) % 3] == e.v1) return +1;
            return -1;
        };
        if (direction(e.f0) == direction(e.f1)) {
            rep.oriented = false;
            rep.issues.push_back("inconsistent winding across edge " + std::to_string(ei));
        }
    }

    // Vertex fan: the incident faces of each vertex, connected through the
    // vertex's interior edges, must form a single component.
    for (int v = 0; v < vertex_count() && rep.vertex_manifold; ++v) {
        const auto& fs = vertex_faces_[v];
        if (fs.empty()) continue;  // isolated vertex; legal but unreferenced
        std::unordered_map<int, int> local;
        for (std::size_t i = 0; i < fs.size(); ++i) local[fs[i]] = static_cast<int>(i);
        std::vector<int> parent(fs.size());
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (int ei : vertex_edges_[v]) {
            const Edge& e = edges_[ei];
            if (e.boundary()) continue;
            auto a = local.find(e.f0), b = local.find(e.f1);
            if (a != local.end() && b != local.end()) parent[find(a->second)] = find(b->second);
        }
        int root = find(0);
        for (std::size_t i = 1; i < fs.size(); ++i) {
            if (find(static_cast<int>(i)) != root) {
                rep.vertex_manifold = false;
                rep.issues.push_back("vertex " + std::to_string(v) +
                                     " has a disconnected face fan");
                break;
            }
        }
    }

    return rep;
}

std::pair<std::vector<int>, int> Mesh::face_components() const {
    std::vector<int> label(face_count(), -1);
    int count = 0;
    std::vector<int> stack;
    for (int f0 = 0; f0 < face_count(); ++f0) {
        if (label[f0] >= 0) continue;
        stack.push_back(f0);
        label[f0] = count;
        while (!stack.empty()) {
            int f = stack.back();
            stack.pop_back();
            for (int ei : face_edges_[f]) {
                const Edge& e = edges_[ei];
                for (int g : {e.f0, e.f1}) {
                    if (g >= 0 && label[g] < 0) {
                        label[g] = count;
                        stack.push_back(g);
                    }
                }
            }
        }
        ++count;
    }
    return {std::move(label), count};
}

std::vector<std::vector<int>> Mesh::boundary_loops() const {
    // Directed boundary edges: for boundary edge {a,b} with face f, the face
    // traverses one direction; the boundary loop follows the opposite
    // direction so the surface stays on its left.
    std::unordered_map<int, int> next;  // from vertex -> to vertex
    for (const Edge& e : edges_) {
        if (!e.boundary()) continue;
        const auto& t = faces_[e.f0];
        int a = -1, b = -1;
        for (int k = 0; k < 3; ++k) {
            if (t[k] == e.v0 && t[(k + 1) % 3] == e.v1) {
                a = e.v0;
                b = e.v1;
            } else if (t[k] == e.v1 && t[(k + 1) % 3] == e.v0) {
                a = e.v1;
                b = e.v0;
            }
        }
        if (a >= 0) next[b] = a;  // reverse of the face's traversal
    }
    std::vector<std::vector<int>> loops;
    std::unordered_map<int, bool> used;
    for (const auto& [start, _] : next) {
        if (used[start]) continue;
        std::vector<int> loop;
        int v = start;
        while (!used[v]) {
            used[v] = true;
            loop.push_back(v);
            auto it = next.find(v);
            if (it == next.end()) break;
            v = it->second;
        }
        loops.push_back(std::move(loop));
    }
    return loops;
}

Mesh Mesh::with_vertices(std::vector<Vec3> vertices) const {
    if (vertices.size() != vertices_.size())
        throw Error("mesh/vertices", "vertex count mismatch");
    MeshData d;
    d.vertices = std::move(vertices);
    d.faces = faces_;
    return Mesh(std::move(d));
}

}  // namespace meshcorr
