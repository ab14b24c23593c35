#include "meshcorr/decimate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "meshcorr/error.hpp"

namespace meshcorr {
namespace {

bool contains(const std::vector<int>& v, int x) {
    return std::find(v.begin(), v.end(), x) != v.end();
}

void erase_value(std::vector<int>& v, int x) {
    auto it = std::find(v.begin(), v.end(), x);
    if (it != v.end()) {
        *it = v.back();
        v.pop_back();
    }
}

struct DynVertex {
    Vec3 pos = Vec3::Zero();
    Eigen::Matrix4d quadric = Eigen::Matrix4d::Zero();
    int origin = -1;
    bool alive = true;
    std::vector<int> edges;
    std::vector<int> faces;
};

struct DynFace {
    std::array<int, 3> v{{-1, -1, -1}};
    bool alive = true;
};

struct DynEdge {
    int v0 = -1;
    int v1 = -1;
    int f[2] = {-1, -1};
    bool alive = true;

    int face_count() const { return (f[0] >= 0 ? 1 : 0) + (f[1] >= 0 ? 1 : 0); }
    bool boundary() const { return face_count() == 1; }
    int other(int v) const { return v == v0 ? v1 : v0; }
    bool has(int v) const { return v == v0 || v == v1; }
    void drop_face(int fid) {
        if (f[0] == fid) {
            f[0] = f[1];
            f[1] = -1;
        } else if (f[1] == fid) {
            f[1] = -1;
        }
    }
    void add_face(int fid) {
        if (f[0] < 0) {
            f[0] = fid;
        } else if (f[1] < 0) {
            f[1] = fid;
        }
    }
};

/// Editable halfedge-free mesh keyed by stable slots. Vertex and face slots
/// are source-mesh indices; edge slots are source canonical edge indices,
/// with merged edges keeping the lower slot. Both the decimator and the
/// trace replay drive the same apply(), which keeps them in lockstep.
struct DynMesh {
    std::vector<DynVertex> verts;
    std::vector<DynFace> faces;
    std::vector<DynEdge> edges;
    int edges_alive = 0;

    explicit DynMesh(const Mesh& mesh) {
        verts.resize(mesh.vertex_count());
        for (int i = 0; i < mesh.vertex_count(); ++i) {
            verts[i].pos = mesh.vertex(i);
            verts[i].origin = i;
            verts[i].edges = mesh.vertex_edges(i);
            verts[i].faces = mesh.vertex_faces(i);
        }
        faces.resize(mesh.face_count());
        for (int f = 0; f < mesh.face_count(); ++f) faces[f].v = mesh.face(f);
        edges.resize(mesh.edge_count());
        for (int e = 0; e < mesh.edge_count(); ++e) {
            const Edge& src = mesh.edge(e);
            edges[e].v0 = src.v0;
            edges[e].v1 = src.v1;
            edges[e].f[0] = src.f0;
            edges[e].f[1] = src.f1;
        }
        edges_alive = mesh.edge_count();
    }

    int find_edge(int a, int b) const {
        const std::vector<int>& list =
            verts[a].edges.size() <= verts[b].edges.size() ? verts[a].edges : verts[b].edges;
        for (int e : list) {
            if (edges[e].alive && edges[e].has(a) && edges[e].has(b)) return e;
        }
        return -1;
    }

    int third_vertex(int fid, int a, int b) const {
        for (int v : faces[fid].v) {
            if (v != a && v != b) return v;
        }
        return -1;
    }

    bool vertex_on_boundary(int v) const {
        for (int e : verts[v].edges) {
            if (edges[e].alive && edges[e].boundary()) return true;
        }
        return false;
    }

    Vec3 face_cross(int fid) const {
        const auto& f = faces[fid].v;
        return (verts[f[1]].pos - verts[f[0]].pos).cross(verts[f[2]].pos - verts[f[0]].pos);
    }

    /// Assembles the full collapse record for `slot` from the current state;
    /// sides are ordered by ascending removed-face id.
    CollapseOp make_op(int slot, int kept, const Vec3& pos) const {
        const DynEdge& e = edges[slot];
        CollapseOp op;
        op.edge = slot;
        op.kept_vertex = kept;
        op.gone_vertex = e.other(kept);
        op.new_position = pos;
        op.edge_len = (verts[e.v0].pos - verts[e.v1].pos).norm();
        int fids[2] = {e.f[0], e.f[1]};
        if (fids[1] >= 0 && (fids[0] < 0 || fids[1] < fids[0])) std::swap(fids[0], fids[1]);
        for (int k = 0; k < 2; ++k) {
            if (fids[k] < 0) continue;
            const int apex = third_vertex(fids[k], e.v0, e.v1);
            const int ea = find_edge(op.kept_vertex, apex);
            const int eb = find_edge(op.gone_vertex, apex);
            CollapseSide side;
            side.removed_face = fids[k];
            side.survivor = std::min(ea, eb);
            side.merged_away = std::max(ea, eb);
            side.survivor_len =
                (verts[edges[side.survivor].v0].pos - verts[edges[side.survivor].v1].pos).norm();
            side.merged_len =
                (verts[edges[side.merged_away].v0].pos - verts[edges[side.merged_away].v1].pos).norm();
            op.sides[op.side_count++] = side;
        }
        return op;
    }

    void apply(const CollapseOp& op) {
        const int kept = op.kept_vertex;
        const int gone = op.gone_vertex;

        for (int s = 0; s < op.side_count; ++s) {
            const int fid = op.sides[s].removed_face;
            DynFace& f = faces[fid];
            for (int i = 0; i < 3; ++i) {
                const int es = find_edge(f.v[i], f.v[(i + 1) % 3]);
                edges[es].drop_face(fid);
            }
            for (int vid : f.v) erase_value(verts[vid].faces, fid);
            f.alive = false;
        }

        for (int s = 0; s < op.side_count; ++s) {
            const CollapseSide& side = op.sides[s];
            DynEdge& surv = edges[side.survivor];
            DynEdge& dead = edges[side.merged_away];
            const int apex = surv.has(kept) ? surv.other(kept) : surv.other(gone);
            for (int k = 0; k < 2; ++k) {
                if (dead.f[k] >= 0) surv.add_face(dead.f[k]);
            }
            surv.v0 = std::min(kept, apex);
            surv.v1 = std::max(kept, apex);
            dead.alive = false;
            dead.f[0] = dead.f[1] = -1;
            erase_value(verts[apex].edges, side.merged_away);
            erase_value(verts[gone].edges, side.merged_away);
            erase_value(verts[kept].edges, side.merged_away);
            erase_value(verts[gone].edges, side.survivor);
            if (!contains(verts[kept].edges, side.survivor)) verts[kept].edges.push_back(side.survivor);
        }

        DynEdge& e = edges[op.edge];
        e.alive = false;
        e.f[0] = e.f[1] = -1;
        erase_value(verts[kept].edges, op.edge);
        erase_value(verts[gone].edges, op.edge);

        for (int es : verts[gone].edges) {
            DynEdge& ed = edges[es];
            if (!ed.alive) continue;
            if (ed.v0 == gone) {
                ed.v0 = kept;
            } else {
                ed.v1 = kept;
            }
            if (ed.v0 > ed.v1) std::swap(ed.v0, ed.v1);
            verts[kept].edges.push_back(es);
        }
        for (int fid : verts[gone].faces) {
            DynFace& f = faces[fid];
            if (!f.alive) continue;
            for (int& vv : f.v) {
                if (vv == gone) vv = kept;
            }
            verts[kept].faces.push_back(fid);
        }

        DynVertex& vk = verts[kept];
        DynVertex& vg = verts[gone];
        const double dk = (vk.pos - op.new_position).norm();
        const double dg = (vg.pos - op.new_position).norm();
        if (dg < dk || (dg == dk && vg.origin < vk.origin)) vk.origin = vg.origin;
        vk.quadric += vg.quadric;
        vk.pos = op.new_position;
        vg.alive = false;
        vg.edges.clear();
        vg.faces.clear();
        edges_alive -= 1 + op.side_count;
    }

    Mesh compact(CollapseTrace* trace) const {
        MeshData data;
        std::vector<int> vmap(verts.size(), -1);
        for (int i = 0; i < static_cast<int>(verts.size()); ++i) {
            if (!verts[i].alive) continue;
            vmap[i] = static_cast<int>(data.vertices.size());
            data.vertices.push_back(verts[i].pos);
        }
        for (const DynFace& f : faces) {
            if (!f.alive) continue;
            data.faces.push_back({vmap[f.v[0]], vmap[f.v[1]], vmap[f.v[2]]});
        }
        Mesh out(std::move(data));
        if (trace) {
            trace->final_vertex_of_slot = vmap;
            trace->source_vertex_of_final.assign(out.vertex_count(), -1);
            for (int i = 0; i < static_cast<int>(verts.size()); ++i) {
                if (vmap[i] >= 0) trace->source_vertex_of_final[vmap[i]] = verts[i].origin;
            }
            trace->final_edge_of_slot.assign(edges.size(), -1);
            for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
                if (!edges[e].alive) continue;
                trace->final_edge_of_slot[e] = out.edge_index(vmap[edges[e].v0], vmap[edges[e].v1]);
            }
        }
        return out;
    }
};

double quadric_eval(const Eigen::Matrix4d& q, const Vec3& p) {
    const Eigen::Vector4d h(p.x(), p.y(), p.z(), 1.0);
    return std::max(0.0, h.dot(q * h));
}

/// Contraction target: minimizer of the combined quadric, or the edge
/// midpoint when the 3x3 system is indefinite or has condition > 1e8.
Vec3 optimal_or_midpoint(const Eigen::Matrix4d& q, const Vec3& pu, const Vec3& pv) {
    const Eigen::Matrix3d a = q.topLeftCorner<3, 3>();
    const Vec3 b = -q.topRightCorner<3, 1>();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(a);
    const Eigen::Vector3d& lam = es.eigenvalues();
    if (!(lam(0) > 0.0) || lam(2) > 1e8 * lam(0)) return 0.5 * (pu + pv);
    return es.eigenvectors() * (es.eigenvectors().transpose() * b).cwiseQuotient(lam);
}

void init_quadrics(DynMesh& dyn) {
    for (int fid = 0; fid < static_cast<int>(dyn.faces.size()); ++fid) {
        const Vec3 cr = dyn.face_cross(fid);
        const double len = cr.norm();
        if (len < 1e-18) continue;
        const Vec3 n = cr / len;
        const double area = 0.5 * len;
        const double d = -n.dot(dyn.verts[dyn.faces[fid].v[0]].pos);
        Eigen::Vector4d p(n.x(), n.y(), n.z(), d);
        const Eigen::Matrix4d k = area * (p * p.transpose());
        for (int v : dyn.faces[fid].v) dyn.verts[v].quadric += k;
    }
    // Penalty planes along boundary edges keep open rims from eroding.
    for (const DynEdge& e : dyn.edges) {
        if (!e.boundary()) continue;
        const Vec3 pu = dyn.verts[e.v0].pos;
        const Vec3 pv = dyn.verts[e.v1].pos;
        const double len = (pv - pu).norm();
        const Vec3 fc = dyn.face_cross(e.f[0]);
        if (len < 1e-12 || fc.norm() < 1e-18) continue;
        const Vec3 nc = fc.normalized().cross((pv - pu) / len).normalized();
        const double d = -nc.dot(pu);
        Eigen::Vector4d p(nc.x(), nc.y(), nc.z(), d);
        const Eigen::Matrix4d k = (1e3 * len * len) * (p * p.transpose());
        dyn.verts[e.v0].quadric += k;
        dyn.verts[e.v1].quadric += k;
    }
}

struct Candidate {
    int kept = -1;
    Vec3 pos = Vec3::Zero();
    double cost = 0;
};

Candidate evaluate_collapse(const DynMesh& dyn, int slot) {
    const DynEdge& e = dyn.edges[slot];
    const Eigen::Matrix4d q = dyn.verts[e.v0].quadric + dyn.verts[e.v1].quadric;
    Candidate c;
    const bool b0 = dyn.vertex_on_boundary(e.v0);
    const bool b1 = dyn.vertex_on_boundary(e.v1);
    if (!e.boundary() && b0 != b1) {
        // Interior edge with one rim endpoint: pin to the rim vertex.
        c.kept = b0 ? e.v0 : e.v1;
        c.pos = dyn.verts[c.kept].pos;
    } else {
        c.kept = e.v0;
        c.pos = optimal_or_midpoint(q, dyn.verts[e.v0].pos, dyn.verts[e.v1].pos);
    }
    c.cost = quadric_eval(q, c.pos);
    return c;
}

std::vector<int> sorted_neighbors(const DynMesh& dyn, int v) {
    std::vector<int> out;
    out.reserve(dyn.verts[v].edges.size());
    for (int e : dyn.verts[v].edges) {
        if (dyn.edges[e].alive) out.push_back(dyn.edges[e].other(v));
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool collapse_legal(const DynMesh& dyn, int slot, const Vec3& pos) {
    const DynEdge& e = dyn.edges[slot];
    const int u = e.v0;
    const int v = e.v1;
    std::vector<int> apexes;
    for (int k = 0; k < 2; ++k) {
        if (e.f[k] >= 0) apexes.push_back(dyn.third_vertex(e.f[k], u, v));
    }
    if (apexes.empty()) return false;
    std::sort(apexes.begin(), apexes.end());

    // A closed edge joining two rim vertices would pinch the surface.
    if (!e.boundary() && dyn.vertex_on_boundary(u) && dyn.vertex_on_boundary(v)) return false;

    // Link condition: common neighbors must be exactly the flanking apexes.
    const std::vector<int> nu = sorted_neighbors(dyn, u);
    const std::vector<int> nv = sorted_neighbors(dyn, v);
    std::vector<int> common;
    std::set_intersection(nu.begin(), nu.end(), nv.begin(), nv.end(), std::back_inserter(common));
    if (common != apexes) return false;

    // Each merged edge pair must keep at least one face (no dangling edges).
    for (int k = 0; k < 2; ++k) {
        if (e.f[k] < 0) continue;
        const int apex = dyn.third_vertex(e.f[k], u, v);
        const int ea = dyn.find_edge(u, apex);
        const int eb = dyn.find_edge(v, apex);
        if (dyn.edges[ea].face_count() + dyn.edges[eb].face_count() - 2 < 1) return false;
    }

    // Reject collapses that flip or crush any surviving face.
    for (int w : {u, v}) {
        for (int fid : dyn.verts[w].faces) {
            const DynFace& f = dyn.faces[fid];
            if (!f.alive || fid == e.f[0] || fid == e.f[1]) continue;
            Vec3 p[3];
            Vec3 pn[3];
            for (int i = 0; i < 3; ++i) {
                p[i] = dyn.verts[f.v[i]].pos;
                pn[i] = (f.v[i] == u || f.v[i] == v) ? pos : p[i];
            }
            const Vec3 n_old = (p[1] - p[0]).cross(p[2] - p[0]);
            const Vec3 n_new = (pn[1] - pn[0]).cross(pn[2] - pn[0]);
            if (n_old.dot(n_new) <= 0.0) return false;
            if (n_new.squaredNorm() < 1e-24) return false;
        }
    }
    return true;
}

struct QItem {
    double cost = 0;
    int slot = -1;
    std::uint64_t version = 0;
};

struct QItemCmp {
    bool operator()(const QItem& a, const QItem& b) const {
        if (a.cost != b.cost) return a.cost > b.cost;
        return a.slot > b.slot;
    }
};

}  // namespace

DecimationResult qslim_decimate(const Mesh& mesh, int target_edges) {
    if (target_edges < 6) {
        throw Error("decimate/target",
                    "target edge count must be at least 6, got " + std::to_string(target_edges));
    }
    if (mesh.edge_count() < target_edges) {
        throw Error("decimate/target", "mesh has " + std::to_string(mesh.edge_count()) +
                                           " edges, below the target " + std::to_string(target_edges));
    }
    const ValidationReport report = mesh.validate();
    if (!report.vertex_manifold || !report.oriented) {
        throw Error("decimate/nonmanifold",
                    report.issues.empty() ? "mesh is not an oriented manifold" : report.issues.front());
    }

    CollapseTrace trace;
    trace.source_vertex_count = mesh.vertex_count();
    trace.source_edge_count = mesh.edge_count();
    trace.source_edge_midpoints.reserve(mesh.edge_count());
    for (int e = 0; e < mesh.edge_count(); ++e) {
        trace.source_edge_midpoints.push_back(mesh.edge_midpoint(e));
    }

    if (mesh.edge_count() == target_edges) {
        trace.final_edge_of_slot.resize(mesh.edge_count());
        trace.final_vertex_of_slot.resize(mesh.vertex_count());
        trace.source_vertex_of_final.resize(mesh.vertex_count());
        for (int e = 0; e < mesh.edge_count(); ++e) trace.final_edge_of_slot[e] = e;
        for (int v = 0; v < mesh.vertex_count(); ++v) {
            trace.final_vertex_of_slot[v] = v;
            trace.source_vertex_of_final[v] = v;
        }
        return {mesh, std::move(trace)};
    }

    DynMesh dyn(mesh);
    init_quadrics(dyn);

    std::vector<std::uint64_t> version(dyn.edges.size(), 0);
    std::priority_queue<QItem, std::vector<QItem>, QItemCmp> queue;
    for (int e = 0; e < static_cast<int>(dyn.edges.size()); ++e) {
        queue.push({evaluate_collapse(dyn, e).cost, e, 0});
    }

    std::vector<int> touched;
    std::vector<int> parked;  // skipped only because of the remaining gap
    while (dyn.edges_alive > target_edges) {
        if (queue.empty()) {
            throw Error("decimate/floor", "no legal collapse left at " +
                                              std::to_string(dyn.edges_alive) + " edges (target " +
                                              std::to_string(target_edges) + ")");
        }
        const QItem item = queue.top();
        queue.pop();
        if (!dyn.edges[item.slot].alive || item.version != version[item.slot]) continue;
        const int removal = dyn.edges[item.slot].boundary() ? 2 : 3;
        // A collapse sheds 2 (boundary) or 3 (interior) edges, so a gap of
        // exactly 1 is a dead end; park collapses that would overshoot or
        // strand the count and retry them once the gap changes.
        const int remaining = dyn.edges_alive - target_edges - removal;
        if (remaining < 0 || remaining == 1) {
            parked.push_back(item.slot);
            continue;
        }
        const Candidate cand = evaluate_collapse(dyn, item.slot);
        if (!collapse_legal(dyn, item.slot, cand.pos)) continue;

        CollapseOp op = dyn.make_op(item.slot, cand.kept, cand.pos);
        dyn.apply(op);

        // Requeue everything whose cost or legality the collapse could have
        // changed: edges at the kept vertex and at both apexes.
        touched.clear();
        touched.insert(touched.end(), dyn.verts[op.kept_vertex].edges.begin(),
                       dyn.verts[op.kept_vertex].edges.end());
        for (int s = 0; s < op.side_count; ++s) {
            const DynEdge& surv = dyn.edges[op.sides[s].survivor];
            const int apex = surv.other(op.kept_vertex);
            touched.insert(touched.end(), dyn.verts[apex].edges.begin(), dyn.verts[apex].edges.end());
        }
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
        for (int es : touched) {
            if (!dyn.edges[es].alive) continue;
            ++version[es];
            queue.push({evaluate_collapse(dyn, es).cost, es, version[es]});
        }
        for (int slot : parked) {
            if (!dyn.edges[slot].alive) continue;
            queue.push({evaluate_collapse(dyn, slot).cost, slot, version[slot]});
        }
        parked.clear();

        trace.ops.push_back(std::move(op));
    }

    Mesh out = dyn.compact(&trace);
    return {std::move(out), std::move(trace)};
}

Mesh replay_collapses(const Mesh& source, const CollapseTrace& trace) {
    if (source.vertex_count() != trace.source_vertex_count ||
        source.edge_count() != trace.source_edge_count) {
        throw Error("decimate/trace", "trace was recorded on a mesh with " +
                                          std::to_string(trace.source_vertex_count) + " vertices and " +
                                          std::to_string(trace.source_edge_count) + " edges");
    }
    DynMesh dyn(source);
    for (const CollapseOp& op : trace.ops) dyn.apply(op);
    return dyn.compact(nullptr);
}

}  // namespace meshcorr
