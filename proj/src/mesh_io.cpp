#include "fmloc/error.hpp"
#include "fmloc/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fmloc {

namespace fs = std::filesystem;

namespace {

std::string lowercase(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::ifstream open_input(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw IOError("cannot open '" + path.string() + "'");
    return in;
}

// Fan-triangulate a polygon; triangles pass through unchanged.
void push_polygon(std::vector<Face>& faces, const std::vector<Index>& poly, const fs::path& path)
{
    if (poly.size() < 3) {
        throw ParseError("polygon with fewer than 3 vertices in '" + path.string() + "'");
    }
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) faces.push_back({poly[0], poly[k], poly[k + 1]});
}

// Next non-empty, non-comment line of an OFF file.
bool next_off_line(std::istream& in, std::string& line)
{
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
}

TriangleMesh read_off(const fs::path& path)
{
    auto in = open_input(path);
    std::string line;
    if (!next_off_line(in, line)) throw ParseError("empty OFF file '" + path.string() + "'");
    std::istringstream header(line);
    std::string magic;
    header >> magic;
    if (magic != "OFF") throw ParseError("missing OFF header in '" + path.string() + "'");

    long long nv = -1, nf = -1, ne = 0;
    if (!(header >> nv)) {
        if (!next_off_line(in, line)) throw ParseError("missing OFF counts");
        header = std::istringstream(line);
        header >> nv;
    }
    if (!(header >> nf >> ne) && nf < 0) throw ParseError("malformed OFF counts line");
    if (nv < 0 || nf < 0) throw ParseError("negative OFF counts");

    std::vector<Vec3> verts;
    verts.reserve(static_cast<std::size_t>(nv));
    for (long long i = 0; i < nv; ++i) {
        if (!next_off_line(in, line)) throw ParseError("OFF file truncated in vertex list");
        std::istringstream ls(line);
        double x, y, z;
        if (!(ls >> x >> y >> z)) {
            throw ParseError("malformed OFF vertex line " + std::to_string(i));
        }
        verts.emplace_back(x, y, z);
    }
    std::vector<Face> faces;
    faces.reserve(static_cast<std::size_t>(nf));
    for (long long f = 0; f < nf; ++f) {
        if (!next_off_line(in, line)) throw ParseError("OFF file truncated in face list");
        std::istringstream ls(line);
        long long k;
        if (!(ls >> k) || k < 3) throw ParseError("malformed OFF face line " + std::to_string(f));
        std::vector<Index> poly(static_cast<std::size_t>(k));
        for (auto& idx : poly) {
            long long v;
            if (!(ls >> v)) throw ParseError("malformed OFF face line " + std::to_string(f));
            idx = v;
        }
        push_polygon(faces, poly, path);
    }
    return TriangleMesh(std::move(verts), std::move(faces), path.stem().string());
}

TriangleMesh read_obj(const fs::path& path)
{
    auto in = open_input(path);
    std::vector<Vec3> verts;
    std::vector<Face> faces;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) throw ParseError("malformed OBJ vertex at line " + std::to_string(lineno));
            verts.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<Index> poly;
            std::string tok;
            while (ls >> tok) {
                const auto slash = tok.find('/');
                const std::string head = tok.substr(0, slash);
                long long v = 0;
                try {
                    std::size_t used = 0;
                    v = std::stoll(head, &used);
                    if (used != head.size()) throw std::invalid_argument(head);
                } catch (const std::exception&) {
                    throw ParseError("malformed OBJ face at line " + std::to_string(lineno));
                }
                if (v == 0) throw ParseError("OBJ index 0 at line " + std::to_string(lineno));
                poly.push_back(v > 0 ? v - 1 : static_cast<Index>(verts.size()) + v);
            }
            push_polygon(faces, poly, path);
        }
    }
    return TriangleMesh(std::move(verts), std::move(faces), path.stem().string());
}

struct PlyElement {
    std::string name;
    long long count = 0;
    std::vector<std::string> props;  // property names in order
    std::vector<bool> is_list;
};

TriangleMesh read_ply(const fs::path& path)
{
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line) || lowercase(line).rfind("ply", 0) != 0) {
        throw ParseError("missing PLY magic in '" + path.string() + "'");
    }
    std::vector<PlyElement> elements;
    bool ascii = false;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "format") {
            std::string fmt;
            ls >> fmt;
            ascii = (fmt == "ascii");
        } else if (tag == "element") {
            PlyElement e;
            ls >> e.name >> e.count;
            elements.push_back(e);
        } else if (tag == "property") {
            if (elements.empty()) throw ParseError("PLY property before element");
            std::string type;
            ls >> type;
            std::string name;
            if (type == "list") {
                std::string ct, it;
                ls >> ct >> it >> name;
                elements.back().is_list.push_back(true);
            } else {
                ls >> name;
                elements.back().is_list.push_back(false);
            }
            elements.back().props.push_back(name);
        } else if (tag == "end_header") {
            break;
        }
    }
    if (!ascii) throw ParseError("only ASCII PLY is supported ('" + path.string() + "')");

    std::vector<Vec3> verts;
    std::vector<Face> faces;
    for (const auto& e : elements) {
        std::vector<int> xyz = {-1, -1, -1};
        int list_prop = -1;
        for (std::size_t k = 0; k < e.props.size(); ++k) {
            if (e.props[k] == "x") xyz[0] = static_cast<int>(k);
            if (e.props[k] == "y") xyz[1] = static_cast<int>(k);
            if (e.props[k] == "z") xyz[2] = static_cast<int>(k);
            if (e.is_list[k] && (e.props[k] == "vertex_indices" || e.props[k] == "vertex_index")) {
                list_prop = static_cast<int>(k);
            }
        }
        for (long long r = 0; r < e.count; ++r) {
            if (!std::getline(in, line)) throw ParseError("PLY body truncated in element " + e.name);
            std::istringstream ls(line);
            double pos[3] = {0, 0, 0};
            std::vector<Index> poly;
            for (std::size_t k = 0; k < e.props.size(); ++k) {
                if (e.is_list[k]) {
                    long long cnt;
                    if (!(ls >> cnt)) throw ParseError("malformed PLY list in element " + e.name);
                    std::vector<Index> vals(static_cast<std::size_t>(std::max(0LL, cnt)));
                    for (auto& v : vals) {
                        double d;
                        if (!(ls >> d)) throw ParseError("malformed PLY list in element " + e.name);
                        v = static_cast<Index>(d);
                    }
                    if (static_cast<int>(k) == list_prop) poly = std::move(vals);
                } else {
                    double d;
                    if (!(ls >> d)) throw ParseError("malformed PLY row in element " + e.name);
                    for (int c = 0; c < 3; ++c) {
                        if (xyz[static_cast<std::size_t>(c)] == static_cast<int>(k)) pos[c] = d;
                    }
                }
            }
            if (e.name == "vertex") {
                if (xyz[0] < 0 || xyz[1] < 0 || xyz[2] < 0) throw ParseError("PLY vertex lacks x/y/z");
                verts.emplace_back(pos[0], pos[1], pos[2]);
            } else if (e.name == "face") {
                if (list_prop < 0) throw ParseError("PLY face lacks vertex_indices");
                push_polygon(faces, poly, path);
            }
        }
    }
    return TriangleMesh(std::move(verts), std::move(faces), path.stem().string());
}

std::ofstream open_output(const fs::path& path)
{
    std::ofstream out(path);
    if (!out) throw IOError("cannot write '" + path.string() + "'");
    return out;
}

// %.9g round-trips single precision and is locale independent enough for
// the "C" numeric locale the tools run under.
std::string fmt_float(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(static_cast<float>(v)));
    return buf;
}

std::string fmt_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

MeshFormat format_from_extension(const fs::path& path)
{
    const auto ext = lowercase(path.extension().string());
    if (ext == ".off") return MeshFormat::OFF;
    if (ext == ".obj") return MeshFormat::OBJ;
    if (ext == ".ply") return MeshFormat::PLY;
    throw ParseError("unrecognised mesh extension '" + ext + "'");
}

TriangleMesh load_mesh(const fs::path& path, MeshFormat format)
{
    if (!fs::exists(path)) throw IOError("no such file '" + path.string() + "'");
    switch (format) {
    case MeshFormat::OFF: return read_off(path);
    case MeshFormat::OBJ: return read_obj(path);
    case MeshFormat::PLY: return read_ply(path);
    }
    throw ParseError("unknown mesh format");
}

TriangleMesh load_mesh(const fs::path& path) { return load_mesh(path, format_from_extension(path)); }

void save_off(const TriangleMesh& mesh, const fs::path& path)
{
    auto out = open_output(path);
    out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_faces() << " 0\n";
    for (const auto& p : mesh.vertices()) {
        out << fmt_double(p.x()) << ' ' << fmt_double(p.y()) << ' ' << fmt_double(p.z()) << '\n';
    }
    for (const auto& t : mesh.faces()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    if (!out) throw IOError("write failed for '" + path.string() + "'");
}

void save_diagnosis_mesh(const TriangleMesh& mesh,
                         const std::vector<double>& scalar,
                         const std::optional<VertexMask>& flags,
                         const fs::path& path)
{
    const auto n = static_cast<std::size_t>(mesh.num_vertices());
    if (scalar.size() != n) {
        throw DimensionMismatch("scalar field has " + std::to_string(scalar.size()) +
                                " entries for " + std::to_string(n) + " vertices");
    }
    if (flags && flags->size() != n) throw DimensionMismatch("flag mask length differs from mesh");

    auto out = open_output(path);
    out << "ply\nformat ascii 1.0\ncomment fmloc diagnosis\n";
    out << "element vertex " << n << '\n';
    out << "property float x\nproperty float y\nproperty float z\nproperty float quality\n";
    if (flags) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out << "element face " << mesh.num_faces() << '\n';
    out << "property list uchar int vertex_indices\nend_header\n";
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = mesh.vertices()[i];
        out << fmt_float(p.x()) << ' ' << fmt_float(p.y()) << ' ' << fmt_float(p.z()) << ' '
            << fmt_float(scalar[i]);
        if (flags) out << ((*flags)[i] ? " 255 255 0" : " 68 1 84");
        out << '\n';
    }
    for (const auto& t : mesh.faces()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    if (!out) throw IOError("write failed for '" + path.string() + "'");
}

} // namespace fmloc
