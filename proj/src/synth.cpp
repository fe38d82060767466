#include "fmloc/synth.hpp"

#include "fmloc/error.hpp"
#include "fmloc/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

namespace fmloc {

namespace {

struct Box3 {
    Vec3 lo;
    Vec3 hi;
};

// Union of axis-aligned boxes, meshed on a per-axis grid whose breakpoints
// include every box face, so the surface is exact and each interval between
// breakpoints is split into round(len / spacing) segments.
class BoxUnion {
public:
    explicit BoxUnion(std::vector<Box3> boxes) : boxes_(std::move(boxes)) {}

    TriangleMesh mesh(double spacing, const std::string& name) const
    {
        std::array<std::vector<double>, 3> grid;
        for (int a = 0; a < 3; ++a) grid[static_cast<std::size_t>(a)] = axis_grid(a, spacing);
        const auto nx = static_cast<Index>(grid[0].size()) - 1;
        const auto ny = static_cast<Index>(grid[1].size()) - 1;
        const auto nz = static_cast<Index>(grid[2].size()) - 1;

        std::vector<char> occupied(static_cast<std::size_t>(nx * ny * nz), 0);
        auto cell = [&](Index i, Index j, Index k) { return (i * ny + j) * nz + k; };
        for (Index i = 0; i < nx; ++i) {
            for (Index j = 0; j < ny; ++j) {
                for (Index k = 0; k < nz; ++k) {
                    const Vec3 c(0.5 * (grid[0][static_cast<std::size_t>(i)] + grid[0][static_cast<std::size_t>(i + 1)]),
                                 0.5 * (grid[1][static_cast<std::size_t>(j)] + grid[1][static_cast<std::size_t>(j + 1)]),
                                 0.5 * (grid[2][static_cast<std::size_t>(k)] + grid[2][static_cast<std::size_t>(k + 1)]));
                    occupied[static_cast<std::size_t>(cell(i, j, k))] = inside(c) ? 1 : 0;
                }
            }
        }
        const std::array<Index, 3> dims = {nx, ny, nz};
        auto is_occupied = [&](std::array<Index, 3> c) {
            for (int a = 0; a < 3; ++a) {
                if (c[static_cast<std::size_t>(a)] < 0 || c[static_cast<std::size_t>(a)] >= dims[static_cast<std::size_t>(a)]) return false;
            }
            return occupied[static_cast<std::size_t>(cell(c[0], c[1], c[2]))] != 0;
        };

        std::vector<Vec3> verts;
        std::vector<Face> faces;
        std::unordered_map<Index, Index> vertex_of;
        auto vertex = [&](std::array<Index, 3> p) {
            const Index key = (p[0] * (ny + 1) + p[1]) * (nz + 1) + p[2];
            const auto [it, inserted] = vertex_of.try_emplace(key, static_cast<Index>(verts.size()));
            if (inserted) {
                verts.emplace_back(grid[0][static_cast<std::size_t>(p[0])], grid[1][static_cast<std::size_t>(p[1])],
                                   grid[2][static_cast<std::size_t>(p[2])]);
            }
            return it->second;
        };

        for (Index i = 0; i < nx; ++i) {
            for (Index j = 0; j < ny; ++j) {
                for (Index k = 0; k < nz; ++k) {
                    const std::array<Index, 3> c = {i, j, k};
                    if (!is_occupied(c)) continue;
                    for (int axis = 0; axis < 3; ++axis) {
                        for (int sign : {1, -1}) {
                            auto nb = c;
                            nb[static_cast<std::size_t>(axis)] += sign;
                            if (is_occupied(nb)) continue;
                            int ua = (axis + 1) % 3;
                            int va = (axis + 2) % 3;
                            if (sign < 0) std::swap(ua, va);
                            auto corner = [&](int du, int dv) {
                                auto p = c;
                                if (sign > 0) p[static_cast<std::size_t>(axis)] += 1;
                                p[static_cast<std::size_t>(ua)] += du;
                                p[static_cast<std::size_t>(va)] += dv;
                                return vertex(p);
                            };
                            const Index p00 = corner(0, 0), p10 = corner(1, 0), p11 = corner(1, 1), p01 = corner(0, 1);
                            if ((i + j + k) % 2 == 0) {
                                faces.push_back({p00, p10, p11});
                                faces.push_back({p00, p11, p01});
                            } else {
                                faces.push_back({p00, p10, p01});
                                faces.push_back({p10, p11, p01});
                            }
                        }
                    }
                }
            }
        }
        return TriangleMesh(std::move(verts), std::move(faces), name);
    }

private:
    bool inside(const Vec3& p) const
    {
        for (const auto& b : boxes_) {
            if ((p.array() > b.lo.array()).all() && (p.array() < b.hi.array()).all()) return true;
        }
        return false;
    }

    std::vector<double> axis_grid(int axis, double spacing) const
    {
        std::vector<double> breaks;
        for (const auto& b : boxes_) {
            breaks.push_back(b.lo[axis]);
            breaks.push_back(b.hi[axis]);
        }
        std::sort(breaks.begin(), breaks.end());
        breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
        std::vector<double> grid = {breaks.front()};
        for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
            const double len = breaks[s + 1] - breaks[s];
            const auto segments = std::max<Index>(1, std::llround(len / spacing));
            for (Index q = 1; q <= segments; ++q) {
                grid.push_back(q == segments ? breaks[s + 1]
                                             : breaks[s] + len * static_cast<double>(q) / static_cast<double>(segments));
            }
        }
        return grid;
    }

    std::vector<Box3> boxes_;
};

BoxUnion toothed_block()
{
    // Elongated base with three teeth of different footprints and heights;
    // the layout has no mirror symmetry.
    return BoxUnion({
        {Vec3(0, 0, 0), Vec3(12, 4, 3)},
        {Vec3(1, 0, 3), Vec3(3, 3, 5)},
        {Vec3(5, 0, 3), Vec3(6, 4, 4)},
        {Vec3(8, 1, 3), Vec3(10, 4, 4)},
    });
}

BoxUnion plain_box() { return BoxUnion({{Vec3(0, 0, 0), Vec3(1.6, 1.0, 0.6)}}); }

// Pick the spacing whose vertex count is closest to the target by bisection
// on log-spacing (vertex count decreases with spacing).
TriangleMesh mesh_box_union(const BoxUnion& solid, Index target, const std::string& name)
{
    double lo = 1e-3, hi = 50.0;
    TriangleMesh best = solid.mesh(hi, name);
    auto consider = [&](TriangleMesh&& m) {
        if (std::llabs(m.num_vertices() - target) < std::llabs(best.num_vertices() - target)) best = std::move(m);
    };
    for (int it = 0; it < 60; ++it) {
        const double mid = std::sqrt(lo * hi);
        auto m = solid.mesh(mid, name);
        const Index count = m.num_vertices();
        consider(std::move(m));
        if (count == target) break;
        if (count > target) lo = mid;
        else hi = mid;
        if (hi / lo < 1.0 + 1e-9) break;
    }
    return best;
}

// Move every vertex within the planes of its incident faces by up to
// `fraction` of its shortest incident edge. Faces of a box union are axis
// aligned, so a coordinate is free when no incident face is normal to that
// axis; the surface itself is unchanged. Breaking the lattice keeps vertex
// rows from lining up with nodal lines.
TriangleMesh jitter_in_plane(const TriangleMesh& mesh, double fraction, std::uint64_t seed)
{
    const auto n = static_cast<std::size_t>(mesh.num_vertices());
    std::vector<std::array<bool, 3>> pinned(n, {false, false, false});
    std::vector<double> shortest(n, std::numeric_limits<double>::infinity());
    for (const auto& t : mesh.faces()) {
        const Vec3 a = mesh.vertex(t[0]), b = mesh.vertex(t[1]), c = mesh.vertex(t[2]);
        Index axis = 0;
        (b - a).cross(c - a).cwiseAbs().maxCoeff(&axis);
        for (int k = 0; k < 3; ++k) {
            const auto v = static_cast<std::size_t>(t[k]);
            pinned[v][static_cast<std::size_t>(axis)] = true;
            const double len = (mesh.vertex(t[(k + 1) % 3]) - mesh.vertex(t[k])).norm();
            shortest[v] = std::min(shortest[v], len);
            const auto w = static_cast<std::size_t>(t[(k + 1) % 3]);
            shortest[w] = std::min(shortest[w], len);
        }
    }
    const CounterRng rng(seed, 2);
    std::vector<Vec3> verts = mesh.vertices();
    for (std::size_t v = 0; v < n; ++v) {
        for (int a = 0; a < 3; ++a) {
            if (pinned[v][static_cast<std::size_t>(a)]) continue;
            const double u = rng.uniform(3 * v + static_cast<std::size_t>(a));
            verts[v][a] += (2.0 * u - 1.0) * fraction * shortest[v];
        }
    }
    return TriangleMesh(std::move(verts), mesh.faces(), mesh.name());
}

TriangleMesh cube_sphere(Index target, const Vec3& axes, const std::string& name)
{
    // n = 6k^2 + 2 for k segments per cube edge.
    const double k_real = std::sqrt(std::max(0.0, static_cast<double>(target - 2) / 6.0));
    Index k = std::max<Index>(1, std::llround(k_real));
    const TriangleMesh cube = BoxUnion({{Vec3(-1, -1, -1), Vec3(1, 1, 1)}}).mesh(2.0 / static_cast<double>(k), name);
    std::vector<Vec3> verts;
    verts.reserve(cube.vertices().size());
    for (const auto& p : cube.vertices()) {
        // Equal-angle projection evens out triangle sizes across each face.
        Vec3 q;
        for (int a = 0; a < 3; ++a) q[a] = std::tan(0.25 * std::numbers::pi * p[a]);
        q.normalize();
        verts.push_back(q.cwiseProduct(axes));
    }
    return TriangleMesh(std::move(verts), cube.faces(), name);
}

TriangleMesh strip(Index target, const std::string& name)
{
    // Flat 4 x 1 rectangle, (nx + 1)(ny + 1) vertices with nx ~ 4 ny.
    Index ny = std::max<Index>(1, std::llround((std::sqrt(static_cast<double>(target) * 4.0) - 1.0) / 4.0));
    Index nx = std::max<Index>(1, std::llround(static_cast<double>(target) / static_cast<double>(ny + 1)) - 1);
    std::vector<Vec3> verts;
    for (Index j = 0; j <= ny; ++j) {
        for (Index i = 0; i <= nx; ++i) {
            verts.emplace_back(4.0 * static_cast<double>(i) / static_cast<double>(nx),
                               static_cast<double>(j) / static_cast<double>(ny), 0.0);
        }
    }
    std::vector<Face> faces;
    auto id = [nx](Index i, Index j) { return j * (nx + 1) + i; };
    for (Index j = 0; j < ny; ++j) {
        for (Index i = 0; i < nx; ++i) {
            if ((i + j) % 2 == 0) {
                faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
                faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
            } else {
                faces.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
                faces.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
            }
        }
    }
    return TriangleMesh(std::move(verts), std::move(faces), name);
}

TriangleMesh clean_mesh(Primitive primitive, Index target)
{
    const std::string name = to_string(primitive);
    switch (primitive) {
    case Primitive::Sphere: return cube_sphere(target, Vec3(1.0, 1.0, 1.0), name);
    case Primitive::Ellipsoid: return cube_sphere(target, Vec3(2.0, 1.0, 0.8), name);
    case Primitive::Box: return mesh_box_union(plain_box(), target, name);
    case Primitive::ToothedBlock:
        return jitter_in_plane(mesh_box_union(toothed_block(), target, name), 0.25, 0x7007edb10cULL);
    case Primitive::Strip: return strip(target, name);
    }
    throw InvalidArgument("unknown primitive");
}

} // namespace

std::string to_string(Primitive p)
{
    switch (p) {
    case Primitive::Sphere: return "sphere";
    case Primitive::Box: return "box";
    case Primitive::ToothedBlock: return "toothed-block";
    case Primitive::Ellipsoid: return "ellipsoid";
    case Primitive::Strip: return "strip";
    }
    return "unknown";
}

std::string to_string(DefectKind k)
{
    switch (k) {
    case DefectKind::Chip: return "chip";
    case DefectKind::Notch: return "notch";
    case DefectKind::Bump: return "bump";
    }
    return "unknown";
}

Primitive primitive_from_string(const std::string& s)
{
    for (auto p : {Primitive::Sphere, Primitive::Box, Primitive::ToothedBlock, Primitive::Ellipsoid, Primitive::Strip}) {
        if (to_string(p) == s) return p;
    }
    throw InvalidArgument("unknown primitive '" + s + "'");
}

DefectKind defect_kind_from_string(const std::string& s)
{
    for (auto k : {DefectKind::Chip, DefectKind::Notch, DefectKind::Bump}) {
        if (to_string(k) == s) return k;
    }
    throw InvalidArgument("unknown defect kind '" + s + "'");
}

SynthPart generate(const PartSpec& spec)
{
    if (spec.resolution < 4) throw ResolutionUnachievable("resolution must be at least 4 vertices");
    if (!(spec.noise_sigma >= 0.0)) throw InvalidArgument("noise sigma must be nonnegative");
    if (spec.defect && !(spec.defect->radius > 0.0 && spec.defect->depth > 0.0)) {
        throw InvalidArgument("defect radius and depth must be positive");
    }

    TriangleMesh clean = clean_mesh(spec.primitive, spec.resolution);
    const Index n = clean.num_vertices();
    const double achieved = static_cast<double>(n) / static_cast<double>(spec.resolution);
    if (achieved < 0.75 || achieved > 1.25) {
        throw ResolutionUnachievable("closest " + to_string(spec.primitive) + " mesh has " + std::to_string(n) +
                                     " vertices for a target of " + std::to_string(spec.resolution));
    }

    const double diag = clean.bbox_diagonal();
    const auto normals = vertex_normals(clean);
    std::vector<Vec3> verts = clean.vertices();

    GroundTruth truth;
    truth.correspondence.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) truth.correspondence[static_cast<std::size_t>(i)] = i;
    truth.defect_mask = VertexMask(static_cast<std::size_t>(n), false);

    if (spec.defect) {
        const auto& d = *spec.defect;
        Vec3 lo = verts.front(), hi = verts.front();
        for (const auto& p : verts) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        const Vec3 target = lo + d.center.cwiseProduct(hi - lo);
        Index closest = 0;
        for (Index i = 1; i < n; ++i) {
            if ((verts[static_cast<std::size_t>(i)] - target).squaredNorm() <
                (verts[static_cast<std::size_t>(closest)] - target).squaredNorm()) {
                closest = i;
            }
        }
        truth.defect_center = verts[static_cast<std::size_t>(closest)];
        truth.defect_radius = d.radius * diag;
        const double depth = d.depth * diag;
        const double direction = d.kind == DefectKind::Bump ? 1.0 : -1.0;
        for (Index i = 0; i < n; ++i) {
            const double r = (clean.vertex(i) - truth.defect_center).norm() / truth.defect_radius;
            if (r >= 1.0) continue;
            const double profile = d.kind == DefectKind::Notch ? 1.0 - r : (1.0 - r * r) * (1.0 - r * r);
            verts[static_cast<std::size_t>(i)] += direction * depth * profile * normals[static_cast<std::size_t>(i)];
            truth.defect_mask.flags[static_cast<std::size_t>(i)] = true;
        }
    }

    if (spec.noise_sigma > 0.0) {
        const CounterRng rng(spec.seed, 1);
        const double sigma = spec.noise_sigma * diag;
        for (Index i = 0; i < n; ++i) {
            verts[static_cast<std::size_t>(i)] +=
                sigma * rng.normal(static_cast<std::uint64_t>(i)) * normals[static_cast<std::size_t>(i)];
        }
    }

    TriangleMesh mesh(std::move(verts), clean.faces(), clean.name());
    return {std::move(mesh), std::move(truth)};
}

std::vector<TriangleMesh> phase1_batch(const PartSpec& spec, Index count, std::uint64_t base_seed)
{
    if (spec.defect) throw InvalidArgument("Phase-I replicates must not carry a defect");
    if (count < 0) throw InvalidArgument("replicate count must be nonnegative");
    std::vector<TriangleMesh> parts;
    parts.reserve(static_cast<std::size_t>(count));
    for (Index i = 0; i < count; ++i) {
        PartSpec s = spec;
        s.seed = base_seed + static_cast<std::uint64_t>(i);
        parts.push_back(generate(s).mesh);
    }
    return parts;
}

} // namespace fmloc
