#pragma once

#include <string>
#include <string_view>

#include "meshcorr/mesh.hpp"

namespace meshcorr {

enum class MeshFormat {
    Obj,
    PlyAscii,
    PlyBinaryLE,
};

/// Guess the format from a file name (".obj" / ".ply"); PLY flavor is read
/// from the header when parsing and defaults to binary when writing.
MeshFormat format_from_path(const std::string& path, bool for_writing);

/// Parse a mesh from raw file content. Polygons with more than three
/// vertices are fan-triangulated. Normals are computed if absent. Throws
/// Error("io/parse", ...) with a line (ascii) or byte (binary) offset on
/// malformed input and Error("mesh/empty", ...) when the file has no faces.
Mesh parse_mesh(std::string_view content, MeshFormat format);

/// Serialize. OBJ writes v/vn/f records; PLY writes x,y,z,nx,ny,nz vertex
/// properties and vertex_indices face lists. Lengths are meters.
std::string write_mesh(const Mesh& mesh, MeshFormat format);

Mesh load_mesh(const std::string& path);
void save_mesh(const Mesh& mesh, const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace meshcorr
