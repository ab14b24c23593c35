#pragma once

#include "meshcorr/mesh.hpp"

namespace meshcorr {

/// Geodesic sphere from a subdivided icosahedron. subdivisions=0 gives the
/// icosahedron (12 vertices); each level quadruples the face count.
Mesh make_icosphere(int subdivisions, double radius = 1.0);

/// Regular unit cube (8 vertices, 12 triangles), edge length `size`.
Mesh make_box(double size = 1.0);

/// Regular tetrahedron with the given edge length, centered at the origin.
Mesh make_tetrahedron(double edge = 1.0);

/// Flat rectangular strip in the z=0 plane, `nx` by `ny` quads, each split
/// into two triangles. Open manifold.
Mesh make_grid_strip(int nx, int ny, double dx = 1.0, double dy = 1.0);

/// Closed capped cylinder along +z: `segments` around, `rings` along the
/// side, capped with triangle fans.
Mesh make_tube(int segments, int rings, double radius, double length);

}  // namespace meshcorr
