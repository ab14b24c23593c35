#include "meshcorr/primitives.hpp"

#include <cmath>
#include <map>

namespace meshcorr {

Mesh make_icosphere(int subdivisions, double radius) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
    };
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
    };
    for (auto& v : verts) v.normalize();

    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            Vec3 m = (verts[a] + verts[b]).normalized();
            int idx = static_cast<int>(verts.size());
            verts.push_back(m);
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            int a = mid(f[0], f[1]), b = mid(f[1], f[2]), c = mid(f[2], f[0]);
            next.push_back({f[0], a, c});
            next.push_back({f[1], b, a});
            next.push_back({f[2], c, b});
            next.push_back({a, b, c});
        }
        faces = std::move(next);
    }

    MeshData data;
    data.vertices.reserve(verts.size());
    for (const auto& v : verts) data.vertices.push_back(v * radius);
    data.faces = std::move(faces);
    return Mesh(std::move(data));
}

Mesh make_box(double size) {
    const double h = size / 2.0;
    MeshData data;
    for (int z = 0; z < 2; ++z)
        for (int y = 0; y < 2; ++y)
            for (int x = 0; x < 2; ++x)
                data.vertices.emplace_back((x ? h : -h), (y ? h : -h), (z ? h : -h));
    // Outward counter-clockwise winding per cube face.
    data.faces = {
        {0, 2, 1}, {1, 2, 3},  // z = -h
        {4, 5, 6}, {5, 7, 6},  // z = +h
        {0, 1, 4}, {1, 5, 4},  // y = -h
        {2, 6, 3}, {3, 6, 7},  // y = +h
        {0, 4, 2}, {2, 4, 6},  // x = -h
        {1, 3, 5}, {3, 7, 5},  // x = +h
    };
    return Mesh(std::move(data));
}

Mesh make_tetrahedron(double edge) {
    const double s = edge / std::sqrt(8.0);  // circumradius scale
    MeshData data;
    data.vertices = {
        Vec3(s, s, s) * std::sqrt(2.0), Vec3(s, -s, -s) * std::sqrt(2.0),
        Vec3(-s, s, -s) * std::sqrt(2.0), Vec3(-s, -s, s) * std::sqrt(2.0)};
    data.faces = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
    return Mesh(std::move(data));
}

Mesh make_grid_strip(int nx, int ny, double dx, double dy) {
    MeshData data;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) data.vertices.emplace_back(i * dx, j * dy, 0.0);
    auto idx = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            data.faces.push_back({idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)});
            data.faces.push_back({idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)});
        }
    }
    return Mesh(std::move(data));
}

Mesh make_tube(int segments, int rings, double radius, double length) {
    MeshData data;
    const double two_pi = 6.283185307179586476925286766559;
    for (int r = 0; r <= rings; ++r) {
        double z = length * r / rings;
        for (int s = 0; s < segments; ++s) {
            double a = two_pi * s / segments;
            data.vertices.emplace_back(radius * std::cos(a), radius * std::sin(a), z);
        }
    }
    auto idx = [&](int r, int s) { return r * segments + (s % segments); };
    for (int r = 0; r < rings; ++r) {
        for (int s = 0; s < segments; ++s) {
            data.faces.push_back({idx(r, s), idx(r, s + 1), idx(r + 1, s + 1)});
            data.faces.push_back({idx(r, s), idx(r + 1, s + 1), idx(r + 1, s)});
        }
    }
    int bottom = static_cast<int>(data.vertices.size());
    data.vertices.emplace_back(0.0, 0.0, 0.0);
    int top = static_cast<int>(data.vertices.size());
    data.vertices.emplace_back(0.0, 0.0, length);
    for (int s = 0; s < segments; ++s) {
        data.faces.push_back({bottom, idx(0, s + 1), idx(0, s)});
        data.faces.push_back({top, idx(rings, s), idx(rings, s + 1)});
    }
    return Mesh(std::move(data));
}

}  // namespace meshcorr
