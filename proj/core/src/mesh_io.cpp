#include "meshcorr/mesh_io.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace meshcorr {

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
    throw Error("io/parse", "line " + std::to_string(line) + ": " + what);
}

[[noreturn]] void parse_fail_at(std::size_t byte, const std::string& what) {
    throw Error("io/parse", "byte offset " + std::to_string(byte) + ": " + what);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

double to_double(std::string_view tok, std::size_t line) {
    // std::from_chars for double is available in libstdc++ 11.
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        parse_fail(line, "bad number '" + std::string(tok) + "'");
    return v;
}

long to_long(std::string_view tok, std::size_t line) {
    long v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        parse_fail(line, "bad integer '" + std::string(tok) + "'");
    return v;
}

void fan_triangulate(const std::vector<int>& poly, std::vector<std::array<int, 3>>& faces,
                     std::size_t line) {
    if (poly.size() < 3) parse_fail(line, "face with fewer than 3 vertices");
    for (std::size_t k = 1; k + 1 < poly.size(); ++k)
        faces.push_back({poly[0], poly[static_cast<int>(k)], poly[k + 1]});
}

Mesh parse_obj(std::string_view content) {
    MeshData data;
    std::vector<Vec3> file_normals;
    // Per-vertex normal index as referenced by f records (v//vn).
    std::vector<int> vertex_normal_ref;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t eol = content.find('\n', pos);
        if (eol == std::string_view::npos) eol = content.size();
        std::string_view line = content.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        auto toks = split_ws(line);
        if (toks.empty() || toks[0][0] == '#') continue;

        if (toks[0] == "v") {
            if (toks.size() < 4) parse_fail(line_no, "v record needs 3 coordinates");
            data.vertices.emplace_back(to_double(toks[1], line_no), to_double(toks[2], line_no),
                                       to_double(toks[3], line_no));
            vertex_normal_ref.push_back(-1);
        } else if (toks[0] == "vn") {
            if (toks.size() < 4) parse_fail(line_no, "vn record needs 3 components");
            file_normals.emplace_back(to_double(toks[1], line_no), to_double(toks[2], line_no),
                                      to_double(toks[3], line_no));
        } else if (toks[0] == "f") {
            std::vector<int> poly;
            for (std::size_t k = 1; k < toks.size(); ++k) {
                std::string_view ref = toks[k];
                std::size_t slash = ref.find('/');
                std::string_view vidx = ref.substr(0, slash);
                long v = to_long(vidx, line_no);
                long nv = static_cast<long>(data.vertices.size());
                if (v < 0) v = nv + v + 1;  // relative index
                if (v < 1 || v > nv) parse_fail(line_no, "face vertex index out of range");
                poly.push_back(static_cast<int>(v - 1));

                if (slash != std::string_view::npos) {
                    std::string_view rest = ref.substr(slash + 1);
                    std::size_t slash2 = rest.find('/');
                    if (slash2 != std::string_view::npos) {
                        std::string_view nidx = rest.substr(slash2 + 1);
                        if (!nidx.empty()) {
                            long n = to_long(nidx, line_no);
                            long nn = static_cast<long>(file_normals.size());
                            if (n < 0) n = nn + n + 1;
                            if (n < 1 || n > nn) parse_fail(line_no, "face normal index out of range");
                            vertex_normal_ref[poly.back()] = static_cast<int>(n - 1);
                        }
                    }
                }
            }
            fan_triangulate(poly, data.faces, line_no);
        }
        // All other record types (vt, o, g, s, usemtl, mtllib) are ignored.
    }

    bool all_normals = !data.vertices.empty();
    for (std::size_t i = 0; i < data.vertices.size() && all_normals; ++i)
        if (vertex_normal_ref[i] < 0) all_normals = false;
    if (all_normals && !file_normals.empty()) {
        data.normals.resize(data.vertices.size());
        for (std::size_t i = 0; i < data.vertices.size(); ++i)
            data.normals[i] = file_normals[vertex_normal_ref[i]];
    }
    return Mesh(std::move(data));
}

struct PlyProperty {
    std::string type;  // float, double, uchar, int, ...
    std::string name;
    bool is_list = false;
    std::string count_type;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> props;
};

std::size_t scalar_size(const std::string& t, std::size_t line) {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" ||
        t == "float32")
        return 4;
    if (t == "double" || t == "float64") return 8;
    parse_fail(line, "unknown ply property type '" + t + "'");
}

double read_scalar_binary(const char* p, const std::string& t) {
    auto load = [&](auto v) {
        std::memcpy(&v, p, sizeof(v));
        return static_cast<double>(v);
    };
    if (t == "char" || t == "int8") return load(std::int8_t{});
    if (t == "uchar" || t == "uint8") return load(std::uint8_t{});
    if (t == "short" || t == "int16") return load(std::int16_t{});
    if (t == "ushort" || t == "uint16") return load(std::uint16_t{});
    if (t == "int" || t == "int32") return load(std::int32_t{});
    if (t == "uint" || t == "uint32") return load(std::uint32_t{});
    if (t == "float" || t == "float32") return load(float{});
    return load(double{});
}

Mesh parse_ply(std::string_view content) {
    // --- header ---
    std::size_t pos = 0, line_no = 0;
    auto next_line = [&]() -> std::string_view {
        if (pos >= content.size()) parse_fail(line_no, "unexpected end of header");
        std::size_t eol = content.find('\n', pos);
        if (eol == std::string_view::npos) eol = content.size();
        std::string_view line = content.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        while (!line.empty() && (line.back() == '\r')) line.remove_suffix(1);
        return line;
    };

    if (next_line() != "ply") parse_fail(1, "missing 'ply' magic");
    bool binary = false;
    std::vector<PlyElement> elements;
    for (;;) {
        auto line = next_line();
        auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (toks[0] == "comment") continue;
        if (toks[0] == "format") {
            if (toks.size() < 2) parse_fail(line_no, "bad format line");
            if (toks[1] == "ascii")
                binary = false;
            else if (toks[1] == "binary_little_endian")
                binary = true;
            else
                parse_fail(line_no, "unsupported ply format '" + std::string(toks[1]) + "'");
        } else if (toks[0] == "element") {
            if (toks.size() < 3) parse_fail(line_no, "bad element line");
            PlyElement el;
            el.name = std::string(toks[1]);
            el.count = static_cast<std::size_t>(to_long(toks[2], line_no));
            elements.push_back(el);
        } else if (toks[0] == "property") {
            if (elements.empty()) parse_fail(line_no, "property before element");
            PlyProperty p;
            if (toks.size() >= 5 && toks[1] == "list") {
                p.is_list = true;
                p.count_type = std::string(toks[2]);
                p.type = std::string(toks[3]);
                p.name = std::string(toks[4]);
            } else if (toks.size() >= 3) {
                p.type = std::string(toks[1]);
                p.name = std::string(toks[2]);
            } else {
                parse_fail(line_no, "bad property line");
            }
            elements.back().props.push_back(p);
        } else if (toks[0] == "end_header") {
            break;
        } else {
            parse_fail(line_no, "unknown header record '" + std::string(toks[0]) + "'");
        }
    }

    MeshData data;
    bool has_normals = false;

    auto handle_vertex = [&](const PlyElement& el, const std::vector<double>& row) {
        int xi = -1, yi = -1, zi = -1, nxi = -1, nyi = -1, nzi = -1;
        for (std::size_t i = 0; i < el.props.size(); ++i) {
            const auto& n = el.props[i].name;
            if (n == "x") xi = static_cast<int>(i);
            if (n == "y") yi = static_cast<int>(i);
            if (n == "z") zi = static_cast<int>(i);
            if (n == "nx") nxi = static_cast<int>(i);
            if (n == "ny") nyi = static_cast<int>(i);
            if (n == "nz") nzi = static_cast<int>(i);
        }
        if (xi < 0 || yi < 0 || zi < 0) parse_fail(line_no, "vertex element lacks x/y/z");
        data.vertices.emplace_back(row[xi], row[yi], row[zi]);
        if (nxi >= 0 && nyi >= 0 && nzi >= 0) {
            has_normals = true;
            data.normals.emplace_back(row[nxi], row[nyi], row[nzi]);
        }
    };

    for (const auto& el : elements) {
        bool is_vertex = el.name == "vertex";
        bool is_face = el.name == "face";
        if (binary) {
            for (std::size_t r = 0; r < el.count; ++r) {
                std::vector<double> row;
                std::vector<int> poly;
                for (const auto& p : el.props) {
                    if (p.is_list) {
                        std::size_t cs = scalar_size(p.count_type, line_no);
                        if (pos + cs > content.size()) parse_fail_at(pos, "truncated ply list count");
                        long n = static_cast<long>(read_scalar_binary(content.data() + pos, p.count_type));
                        pos += cs;
                        std::size_t ss = scalar_size(p.type, line_no);
                        if (pos + ss * n > content.size()) parse_fail_at(pos, "truncated ply list");
                        for (long k = 0; k < n; ++k) {
                            double v = read_scalar_binary(content.data() + pos, p.type);
                            pos += ss;
                            if (is_face && p.name.rfind("vertex_ind", 0) == 0)
                                poly.push_back(static_cast<int>(v));
                        }
                    } else {
                        std::size_t ss = scalar_size(p.type, line_no);
                        if (pos + ss > content.size()) parse_fail_at(pos, "truncated ply record");
                        row.push_back(read_scalar_binary(content.data() + pos, p.type));
                        pos += ss;
                    }
                }
                if (is_vertex) handle_vertex(el, row);
                if (is_face && !poly.empty()) {
                    for (int v : poly)
                        if (v < 0 || v >= static_cast<int>(data.vertices.size()))
                            parse_fail_at(pos, "face vertex index out of range");
                    fan_triangulate(poly, data.faces, line_no);
                }
            }
        } else {
            for (std::size_t r = 0; r < el.count; ++r) {
                auto toks = split_ws(next_line());
                std::size_t ti = 0;
                std::vector<double> row;
                std::vector<int> poly;
                for (const auto& p : el.props) {
                    if (p.is_list) {
                        if (ti >= toks.size()) parse_fail(line_no, "truncated list");
                        long n = to_long(toks[ti++], line_no);
                        for (long k = 0; k < n; ++k) {
                            if (ti >= toks.size()) parse_fail(line_no, "truncated list");
                            long v = to_long(toks[ti++], line_no);
                            if (is_face && p.name.rfind("vertex_ind", 0) == 0)
                                poly.push_back(static_cast<int>(v));
                        }
                    } else {
                        if (ti >= toks.size()) parse_fail(line_no, "truncated record");
                        row.push_back(to_double(toks[ti++], line_no));
                    }
                }
                if (is_vertex) handle_vertex(el, row);
                if (is_face && !poly.empty()) {
                    for (int v : poly)
                        if (v < 0 || v >= static_cast<int>(data.vertices.size()))
                            parse_fail(line_no, "face vertex index out of range");
                    fan_triangulate(poly, data.faces, line_no);
                }
            }
        }
    }

    if (has_normals && data.normals.size() != data.vertices.size())
        parse_fail(line_no, "some vertices carry normals, others do not");
    return Mesh(std::move(data));
}

void append_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    out += buf;
}

}  // namespace

MeshFormat format_from_path(const std::string& path, bool for_writing) {
    auto dot = path.rfind('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    for (auto& c : ext) c = static_cast<char>(std::tolower(c));
    if (ext == "obj") return MeshFormat::Obj;
    if (ext == "ply") return for_writing ? MeshFormat::PlyBinaryLE : MeshFormat::PlyAscii;
    throw Error("io/format", "cannot infer mesh format from '" + path + "'");
}

Mesh parse_mesh(std::string_view content, MeshFormat format) {
    if (format == MeshFormat::Obj) return parse_obj(content);
    return parse_ply(content);  // flavor is declared in the header
}

std::string write_mesh(const Mesh& mesh, MeshFormat format) {
    std::string out;
    if (format == MeshFormat::Obj) {
        out.reserve(mesh.vertex_count() * 48 + mesh.face_count() * 24);
        for (const auto& v : mesh.vertices()) {
            out += "v ";
            append_double(out, v.x());
            out += ' ';
            append_double(out, v.y());
            out += ' ';
            append_double(out, v.z());
            out += '\n';
        }
        for (const auto& n : mesh.normals()) {
            out += "vn ";
            append_double(out, n.x());
            out += ' ';
            append_double(out, n.y());
            out += ' ';
            append_double(out, n.z());
            out += '\n';
        }
        for (const auto& f : mesh.faces()) {
            out += "f ";
            for (int k = 0; k < 3; ++k) {
                int idx = f[k] + 1;
                out += std::to_string(idx);
                out += "//";
                out += std::to_string(idx);
                if (k < 2) out += ' ';
            }
            out += '\n';
        }
        return out;
    }

    const bool binary = format == MeshFormat::PlyBinaryLE;
    out += "ply\n";
    out += binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n";
    out += "element vertex " + std::to_string(mesh.vertex_count()) + "\n";
    for (const char* p : {"x", "y", "z", "nx", "ny", "nz"})
        out += std::string("property float ") + p + "\n";
    out += "element face " + std::to_string(mesh.face_count()) + "\n";
    out += "property list uchar int vertex_indices\n";
    out += "end_header\n";

    if (binary) {
        auto put_f32 = [&](double v) {
            float f = static_cast<float>(v);
            char buf[4];
            std::memcpy(buf, &f, 4);
            out.append(buf, 4);
        };
        for (int i = 0; i < mesh.vertex_count(); ++i) {
            const Vec3& v = mesh.vertex(i);
            const Vec3& n = mesh.normals()[i];
            put_f32(v.x());
            put_f32(v.y());
            put_f32(v.z());
            put_f32(n.x());
            put_f32(n.y());
            put_f32(n.z());
        }
        for (const auto& f : mesh.faces()) {
            out.push_back(static_cast<char>(3));
            for (int k = 0; k < 3; ++k) {
                std::int32_t idx = f[k];
                char buf[4];
                std::memcpy(buf, &idx, 4);
                out.append(buf, 4);
            }
        }
    } else {
        for (int i = 0; i < mesh.vertex_count(); ++i) {
            const Vec3& v = mesh.vertex(i);
            const Vec3& n = mesh.normals()[i];
            for (double c : {v.x(), v.y(), v.z(), n.x(), n.y(), n.z()}) {
                append_double(out, c);
                out += ' ';
            }
            out.back() = '\n';
        }
        for (const auto& f : mesh.faces()) {
            out += "3 " + std::to_string(f[0]) + ' ' + std::to_string(f[1]) + ' ' +
                   std::to_string(f[2]) + '\n';
        }
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io/open", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io/open", "cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("io/write", "failed writing '" + path + "'");
}

Mesh load_mesh(const std::string& path) {
    return parse_mesh(read_file(path), format_from_path(path, false));
}

void save_mesh(const Mesh& mesh, const std::string& path) {
    write_file(path, write_mesh(mesh, format_from_path(path, true)));
}

}  // namespace meshcorr
