#include "fmloc/mesh.hpp"

#include "fmloc/error.hpp"
#include "fmloc/log.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <sstream>
#include <utility>

namespace fmloc {

namespace {

struct DirectedEdge {
    Index a;
    Index b;
    Index face;
};

double compute_bbox_diagonal(const std::vector<Vec3>& v)
{
    if (v.empty()) return 0.0;
    Vec3 lo = v.front();
    Vec3 hi = v.front();
    for (const auto& p : v) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return (hi - lo).norm();
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c)
{
    return 0.5 * (b - a).cross(c - a).norm();
}

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x)
    {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) std::swap(a, b);
        parent_[a] = b;
    }

private:
    std::vector<std::size_t> parent_;
};

} // namespace

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces, std::string name)
    : vertices_(std::move(vertices)), faces_(std::move(faces)), name_(std::move(name))
{
    const Index n = num_vertices();
    for (std::size_t f = 0; f < faces_.size(); ++f) {
        const auto& t = faces_[f];
        for (Index idx : t) {
            if (idx < 0 || idx >= n) {
                std::ostringstream msg;
                msg << "face " << f << " references vertex " << idx << " outside [0, " << n << ")";
                throw ValidationError(msg.str());
            }
        }
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
            std::ostringstream msg;
            msg << "face " << f << " repeats a vertex index (" << t[0] << ", " << t[1] << ", "
                << t[2] << ")";
            throw ValidationError(msg.str());
        }
    }
    for (const auto& p : vertices_) {
        if (!p.allFinite()) throw ValidationError("vertex with non-finite coordinate");
    }

    const double tol = area_tolerance();
    for (Index f = 0; f < num_faces(); ++f) {
        const double a = face_area(f);
        if (!(a > tol)) {
            std::ostringstream msg;
            msg << "face " << f << " is degenerate (area " << a << " <= " << tol << ")";
            throw ValidationError(msg.str());
        }
    }

    // Edge-manifold and orientation check over undirected edges.
    std::vector<DirectedEdge> edges;
    edges.reserve(faces_.size() * 3);
    for (Index f = 0; f < num_faces(); ++f) {
        const auto& t = face(f);
        for (int k = 0; k < 3; ++k) edges.push_back({t[k], t[(k + 1) % 3], f});
    }
    auto key = [](const DirectedEdge& e) { return std::minmax(e.a, e.b); };
    std::sort(edges.begin(), edges.end(), [&](const DirectedEdge& x, const DirectedEdge& y) {
        return std::make_pair(key(x), x.face) < std::make_pair(key(y), y.face);
    });
    bool consistent = true;
    for (std::size_t i = 0; i < edges.size();) {
        std::size_t j = i;
        while (j < edges.size() && key(edges[j]) == key(edges[i])) ++j;
        if (j - i > 2) {
            std::ostringstream msg;
            msg << "edge (" << key(edges[i]).first << ", " << key(edges[i]).second << ") is shared by "
                << (j - i) << " faces (first: " << edges[i].face << ")";
            throw ValidationError(msg.str());
        }
        if (j - i == 2 && edges[i].a == edges[i + 1].a) consistent = false;
        i = j;
    }
    if (!consistent) {
        warn("mesh '" + name_ + "' has inconsistent face orientation; continuing");
    }
}

double TriangleMesh::bbox_diagonal() const { return compute_bbox_diagonal(vertices_); }

double TriangleMesh::face_area(Index f) const
{
    const auto& t = face(f);
    return triangle_area(vertex(t[0]), vertex(t[1]), vertex(t[2]));
}

double TriangleMesh::surface_area() const
{
    double total = 0.0;
    for (Index f = 0; f < num_faces(); ++f) total += face_area(f);
    return total;
}

double TriangleMesh::area_tolerance() const
{
    const double d = bbox_diagonal();
    return 1e-12 * d * d;
}

std::size_t VertexMask::count() const
{
    return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
}

std::vector<Index> VertexMask::indices() const
{
    std::vector<Index> out;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (flags[i]) out.push_back(static_cast<Index>(i));
    }
    return out;
}

VertexMask VertexMask::from_indices(std::size_t n, const std::vector<Index>& idx)
{
    VertexMask mask(n, false);
    for (Index i : idx) {
        if (i < 0 || static_cast<std::size_t>(i) >= n) {
            throw ValidationError("mask index " + std::to_string(i) + " out of range");
        }
        mask.flags[static_cast<std::size_t>(i)] = true;
    }
    return mask;
}

std::vector<Index> connected_components(const TriangleMesh& mesh)
{
    const auto n = static_cast<std::size_t>(mesh.num_vertices());
    UnionFind uf(n);
    for (const auto& t : mesh.faces()) {
        uf.unite(static_cast<std::size_t>(t[0]), static_cast<std::size_t>(t[1]));
        uf.unite(static_cast<std::size_t>(t[1]), static_cast<std::size_t>(t[2]));
    }
    std::vector<Index> root_label(n, -1);
    std::vector<Index> labels(n);
    Index next = 0;
    for (std::size_t v = 0; v < n; ++v) {
        const auto r = uf.find(v);
        if (root_label[r] < 0) root_label[r] = next++;
        labels[v] = root_label[r];
    }
    return labels;
}

Index count_components(const std::vector<Index>& labels)
{
    if (labels.empty()) return 0;
    return *std::max_element(labels.begin(), labels.end()) + 1;
}

SubmeshResult extract_submesh(const TriangleMesh& mesh, const VertexMask& keep)
{
    const auto n = static_cast<std::size_t>(mesh.num_vertices());
    if (keep.size() != n) {
        throw DimensionMismatch("mask has " + std::to_string(keep.size()) + " entries, mesh has " +
                                std::to_string(n) + " vertices");
    }
    std::vector<Face> kept_faces;
    std::vector<bool> used(n, false);
    for (const auto& t : mesh.faces()) {
        if (keep[static_cast<std::size_t>(t[0])] && keep[static_cast<std::size_t>(t[1])] &&
            keep[static_cast<std::size_t>(t[2])]) {
            kept_faces.push_back(t);
            for (Index v : t) used[static_cast<std::size_t>(v)] = true;
        }
    }
    if (kept_faces.empty()) throw EmptySubmesh("no face has all three vertices selected");

    std::vector<Index> new_index(n, -1);
    std::vector<Index> parent;
    std::vector<Vec3> verts;
    for (std::size_t v = 0; v < n; ++v) {
        if (!used[v]) continue;
        new_index[v] = static_cast<Index>(parent.size());
        parent.push_back(static_cast<Index>(v));
        verts.push_back(mesh.vertex(static_cast<Index>(v)));
    }
    for (auto& t : kept_faces) {
        for (auto& idx : t) idx = new_index[static_cast<std::size_t>(idx)];
    }
    return {TriangleMesh(std::move(verts), std::move(kept_faces), mesh.name()), std::move(parent)};
}

std::vector<Vec3> vertex_normals(const TriangleMesh& mesh)
{
    std::vector<Vec3> normals(static_cast<std::size_t>(mesh.num_vertices()), Vec3::Zero());
    for (const auto& t : mesh.faces()) {
        // Cross product length is twice the area, so this is area weighting.
        const Vec3 nrm =
            (mesh.vertex(t[1]) - mesh.vertex(t[0])).cross(mesh.vertex(t[2]) - mesh.vertex(t[0]));
        for (Index v : t) normals[static_cast<std::size_t>(v)] += nrm;
    }
    for (auto& nrm : normals) {
        const double len = nrm.norm();
        if (len > 0.0) nrm /= len;
    }
    return normals;
}

std::uint64_t content_hash(const TriangleMesh& mesh)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void* data, std::size_t len) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ULL;
        }
    };
    const std::int64_t counts[2] = {mesh.num_vertices(), mesh.num_faces()};
    feed(counts, sizeof(counts));
    for (const auto& p : mesh.vertices()) {
        const double xyz[3] = {p.x(), p.y(), p.z()};
        feed(xyz, sizeof(xyz));
    }
    for (const auto& t : mesh.faces()) {
        const std::int64_t idx[3] = {t[0], t[1], t[2]};
        feed(idx, sizeof(idx));
    }
    return h;
}

std::string hash_hex(std::uint64_t h)
{
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace fmloc
