#pragma once

#include "fmloc/eigensolver.hpp"
#include "fmloc/fem.hpp"
#include "fmloc/mesh.hpp"

#include <Eigen/Core>

#include <utility>

#include <vector>

namespace fmloc {

/// Deviation inside the ROI, 0 outside.
std::vector<double> filter_roi(const std::vector<double>& deviation, const VertexMask& roi);

/// One side of a nodal cut. Triangles crossing the nodal line are split
/// along the linearly interpolated zero level, so the domain boundary moves
/// continuously with the eigenfunction. Cut vertices have parent index -1.
struct NodalDomain {
    TriangleMesh mesh;
    std::vector<Index> parent_index;
};

/// Nodal bipartition of a mesh. `plus_mask` is the sign partition of the
/// parent vertices (zeros on the plus side).
struct PartitionPair {
    NodalDomain plus;
    NodalDomain minus;
    VertexMask plus_mask;
    bool swapped = false;

    Index plus_count() const { return static_cast<Index>(plus_mask.count()); }
    Index minus_count() const { return static_cast<Index>(plus_mask.size()) - plus_count(); }
};

/// Split by the sign of the eigenfunction of the first nonzero eigenvalue.
/// Throws EmptySubmesh when either side is empty.
PartitionPair nodal_split(const TriangleMesh& mesh, FemDegree degree, const EigenSolverOptions& solver = {});

/// Cut a mesh along the zero level of a per-vertex field. Crossings closer
/// than `snap` (as a fraction of the edge) to an endpoint are moved onto it,
/// which keeps the cut triangles well shaped.
std::pair<NodalDomain, NodalDomain> cut_at_zero_level(const TriangleMesh& mesh,
                                                      const Eigen::VectorXd& field,
                                                      double snap = 0.05);

/// Returns `b`, with its sides exchanged when
/// (|A+| - |A-|) (|B+| - |B-|) < 0. A zero product leaves `b` unchanged and
/// emits an AmbiguousMatch warning.
PartitionPair match_components(const PartitionPair& a, const PartitionPair& b);

struct RoiOptions {
    /// Eigenvalues compared per side.
    Index num_eigenvalues = 15;
    /// A side must have at least this many vertices per compared eigenvalue.
    Index vertices_per_eigenvalue = 8;
};

struct RoiScore {
    double plus = 0.0;   // sum |lambda^A_{+,i} - lambda^B_{+,i}|
    double minus = 0.0;  // same for the minus sides
    bool swapped = false;
    bool tie = false;    // equal sums; the minus side was taken
    bool took_plus = false;
};

struct RoiResult {
    VertexMask mask;          // on the original suspect mesh
    VertexMask nominal_mask;  // matched region on the original nominal mesh
    Index iterations = 0;
    std::vector<RoiScore> scores;
    bool stopped_early = false;  // a side was too small for another split
};

/// Recursive nodal-domain search for the region that differs most between
/// suspect and nominal. Each iteration splits both current meshes, matches
/// their sides, and keeps the side pair whose low spectra differ more.
RoiResult recursive_roi(const TriangleMesh& suspect,
                        const TriangleMesh& nominal,
                        Index iterations,
                        FemDegree degree,
                        const RoiOptions& options = {},
                        const EigenSolverOptions& solver = {});

} // namespace fmloc
