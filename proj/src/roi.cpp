#include "fmloc/roi.hpp"

#include "fmloc/error.hpp"
#include "fmloc/log.hpp"
#include "fmloc/spectral.hpp"

#include <cmath>
#include <map>

namespace fmloc {

namespace {

Eigen::VectorXd low_spectrum(const TriangleMesh& mesh, FemDegree degree, Index count, const EigenSolverOptions& solver)
{
    return solve_smallest_eigs(assemble(mesh, degree), count, solver).eigenvalues;
}

double spectral_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    return (a - b).cwiseAbs().sum();
}

// Lift a mask on `current` to the original mesh through the index chain.
VertexMask lift(const VertexMask& local, const std::vector<Index>& chain, std::size_t original_size)
{
    VertexMask out(original_size, false);
    for (std::size_t v = 0; v < local.size(); ++v) {
        if (local[v] && chain[v] >= 0) out.flags[static_cast<std::size_t>(chain[v])] = true;
    }
    return out;
}

std::vector<Index> compose(const std::vector<Index>& chain, const std::vector<Index>& parent_index)
{
    std::vector<Index> out(parent_index.size());
    for (std::size_t v = 0; v < parent_index.size(); ++v) {
        out[v] = parent_index[v] < 0 ? -1 : chain[static_cast<std::size_t>(parent_index[v])];
    }
    return out;
}

VertexMask complement(const VertexMask& mask)
{
    std::vector<bool> flags = mask.flags;
    flags.flip();
    return VertexMask(std::move(flags));
}

std::vector<Index> identity(Index n)
{
    std::vector<Index> out(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = i;
    return out;
}

NodalDomain build_domain(const std::vector<Vec3>& points, std::vector<Face> faces, Index original, const std::string& name)
{
    if (faces.empty()) throw EmptySubmesh("nodal domain has no faces");
    std::vector<Index> remap(points.size(), -1);
    std::vector<char> used(points.size(), 0);
    for (const auto& f : faces) {
        for (Index v : f) used[static_cast<std::size_t>(v)] = 1;
    }
    std::vector<Vec3> verts;
    std::vector<Index> parent;
    for (std::size_t v = 0; v < points.size(); ++v) {
        if (!used[v]) continue;
        remap[v] = static_cast<Index>(verts.size());
        verts.push_back(points[v]);
        parent.push_back(static_cast<Index>(v) < original ? static_cast<Index>(v) : -1);
    }
    for (auto& f : faces) {
        for (auto& v : f) v = remap[static_cast<std::size_t>(v)];
    }
    return {TriangleMesh(std::move(verts), std::move(faces), name), std::move(parent)};
}

} // namespace

std::pair<NodalDomain, NodalDomain> cut_at_zero_level(const TriangleMesh& mesh, const Eigen::VectorXd& field, double snap)
{
    const Index n = mesh.num_vertices();
    if (field.size() != n) throw DimensionMismatch("field length differs from vertex count");

    // Snap crossings near an endpoint onto that endpoint.
    Eigen::VectorXd phi = field;
    for (const auto& f : mesh.faces()) {
        for (int k = 0; k < 3; ++k) {
            const Index a = f[k], b = f[(k + 1) % 3];
            if ((field[a] >= 0.0) == (field[b] >= 0.0)) continue;
            const double t = field[a] / (field[a] - field[b]);
            if (t < snap) phi[a] = 0.0;
            if (t > 1.0 - snap) phi[b] = 0.0;
        }
    }
    auto side = [&phi](Index v) { return phi[v] > 0.0 ? 1 : (phi[v] < 0.0 ? -1 : 0); };

    std::vector<Vec3> points = mesh.vertices();
    std::map<std::pair<Index, Index>, Index> crossing;
    auto cross_point = [&](Index a, Index b) {
        const std::pair<Index, Index> key = std::minmax(a, b);
        const auto [it, inserted] = crossing.try_emplace(key, static_cast<Index>(points.size()));
        if (inserted) {
            const double t = phi[key.first] / (phi[key.first] - phi[key.second]);
            points.push_back(mesh.vertex(key.first) + t * (mesh.vertex(key.second) - mesh.vertex(key.first)));
        }
        return it->second;
    };

    std::vector<Face> plus, minus;
    for (const auto& f : mesh.faces()) {
        int pos = 0, neg = 0;
        for (Index v : f) {
            pos += side(v) > 0;
            neg += side(v) < 0;
        }
        if (neg == 0) {
            plus.push_back(f);
            continue;
        }
        if (pos == 0) {
            minus.push_back(f);
            continue;
        }
        if (pos + neg == 2) {
            // One vertex on the level set: split through it.
            int z = 0;
            while (side(f[z]) != 0) ++z;
            const Index a = f[z], b = f[(z + 1) % 3], c = f[(z + 2) % 3];
            const Index q = cross_point(b, c);
            (side(b) > 0 ? plus : minus).push_back({a, b, q});
            (side(c) > 0 ? plus : minus).push_back({a, q, c});
            continue;
        }
        // A lone vertex on one side, the other two on the opposite side.
        const int lone_sign = pos == 1 ? 1 : -1;
        int l = 0;
        while (side(f[l]) != lone_sign) ++l;
        const Index a = f[l], b = f[(l + 1) % 3], c = f[(l + 2) % 3];
        const Index ab = cross_point(a, b), ac = cross_point(a, c);
        auto& lone = lone_sign > 0 ? plus : minus;
        auto& pair = lone_sign > 0 ? minus : plus;
        lone.push_back({a, ab, ac});
        pair.push_back({ab, b, c});
        pair.push_back({ab, c, ac});
    }
    return {build_domain(points, std::move(plus), n, mesh.name()), build_domain(points, std::move(minus), n, mesh.name())};
}

std::vector<double> filter_roi(const std::vector<double>& deviation, const VertexMask& roi)
{
    if (deviation.size() != roi.size()) {
        throw DimensionMismatch("deviation has " + std::to_string(deviation.size()) + " entries, ROI mask " +
                                std::to_string(roi.size()));
    }
    std::vector<double> out(deviation.size(), 0.0);
    for (std::size_t i = 0; i < deviation.size(); ++i) {
        if (roi[i]) out[i] = deviation[i];
    }
    return out;
}

PartitionPair nodal_split(const TriangleMesh& mesh, FemDegree degree, const EigenSolverOptions& solver)
{
    if (mesh.num_faces() < 2) throw InvalidArgument("nodal split needs at least two faces");
    const auto ops = assemble(mesh, degree);
    const Index n = mesh.num_vertices();
    // Enough pairs to step over a zero eigenvalue per component of a mildly
    // disconnected submesh.
    const Index p = std::min<Index>(ops.num_dofs() - 1, 6);
    const auto eig = solve_smallest_eigs(ops, p, solver);
    const Index k = first_nonzero_index(eig.eigenvalues);

    VertexMask plus(static_cast<std::size_t>(n), false);
    for (Index v = 0; v < n; ++v) plus.flags[static_cast<std::size_t>(v)] = eig.eigenvectors(v, k) >= 0.0;
    auto [plus_domain, minus_domain] = cut_at_zero_level(mesh, eig.eigenvectors.col(k).head(n));
    return PartitionPair{std::move(plus_domain), std::move(minus_domain), plus, false};
}

PartitionPair match_components(const PartitionPair& a, const PartitionPair& b)
{
    const Index da = a.plus_count() - a.minus_count();
    const Index db = b.plus_count() - b.minus_count();
    PartitionPair out = b;
    if (da == 0 || db == 0) {
        warn("AmbiguousMatch: nodal domains of equal size (" + std::to_string(a.plus_count()) + "/" +
             std::to_string(a.minus_count()) + " vs " + std::to_string(b.plus_count()) + "/" +
             std::to_string(b.minus_count()) + "); sides left as computed");
        return out;
    }
    if ((da > 0) != (db > 0)) {
        std::swap(out.plus, out.minus);
        out.plus_mask = complement(out.plus_mask);
        out.swapped = !b.swapped;
    }
    return out;
}

RoiResult recursive_roi(const TriangleMesh& suspect,
                        const TriangleMesh& nominal,
                        Index iterations,
                        FemDegree degree,
                        const RoiOptions& options,
                        const EigenSolverOptions& solver)
{
    if (iterations < 1 || iterations > 3) throw InvalidArgument("ROI iterations must lie in [1, 3]");
    if (options.num_eigenvalues < 2) throw InvalidArgument("ROI comparison needs at least two eigenvalues");
    const Index min_vertices = options.num_eigenvalues * options.vertices_per_eigenvalue;

    TriangleMesh a = suspect;
    TriangleMesh b = nominal;
    std::vector<Index> chain_a = identity(suspect.num_vertices());
    std::vector<Index> chain_b = identity(nominal.num_vertices());

    RoiResult result;
    result.mask = VertexMask(static_cast<std::size_t>(suspect.num_vertices()), true);
    result.nominal_mask = VertexMask(static_cast<std::size_t>(nominal.num_vertices()), true);

    for (Index it = 0; it < iterations; ++it) {
        const PartitionPair pa = nodal_split(a, degree, solver);
        const PartitionPair pb = match_components(pa, nodal_split(b, degree, solver));

        const Index smallest = std::min({pa.plus.mesh.num_vertices(), pa.minus.mesh.num_vertices(),
                                         pb.plus.mesh.num_vertices(), pb.minus.mesh.num_vertices()});
        if (smallest < min_vertices) {
            warn("SubmeshTooSmall: a nodal domain has " + std::to_string(smallest) + " vertices, fewer than the " +
                 std::to_string(min_vertices) + " needed to compare " + std::to_string(options.num_eigenvalues) +
                 " eigenvalues; returning the region after " + std::to_string(it) + " iterations");
            result.stopped_early = true;
            break;
        }

        RoiScore score;
        score.swapped = pb.swapped;
        score.plus = spectral_distance(low_spectrum(pa.plus.mesh, degree, options.num_eigenvalues, solver),
                                       low_spectrum(pb.plus.mesh, degree, options.num_eigenvalues, solver));
        score.minus = spectral_distance(low_spectrum(pa.minus.mesh, degree, options.num_eigenvalues, solver),
                                        low_spectrum(pb.minus.mesh, degree, options.num_eigenvalues, solver));
        score.took_plus = score.plus > score.minus;
        score.tie = score.plus == score.minus;
        result.scores.push_back(score);

        // The region is the sign side of the current mesh.
        const VertexMask side_a = score.took_plus ? pa.plus_mask : complement(pa.plus_mask);
        const VertexMask side_b = score.took_plus ? pb.plus_mask : complement(pb.plus_mask);
        result.mask = lift(side_a, chain_a, static_cast<std::size_t>(suspect.num_vertices()));
        result.nominal_mask = lift(side_b, chain_b, static_cast<std::size_t>(nominal.num_vertices()));
        result.iterations = it + 1;

        const NodalDomain& next_a = score.took_plus ? pa.plus : pa.minus;
        const NodalDomain& next_b = score.took_plus ? pb.plus : pb.minus;
        chain_a = compose(chain_a, next_a.parent_index);
        chain_b = compose(chain_b, next_b.parent_index);
        a = next_a.mesh;
        b = next_b.mesh;
    }
    return result;
}

} // namespace fmloc
