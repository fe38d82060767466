#pragma once

#include "fmloc/config.hpp"
#include "fmloc/funcmap.hpp"
#include "fmloc/hks.hpp"
#include "fmloc/mesh.hpp"
#include "fmloc/spectral.hpp"

#include <optional>

namespace fmloc {

/// Everything the pipeline needs from the nominal mesh, computed once and
/// reused for every part matched against it. The time grid comes from the
/// nominal spectrum and is shared by both meshes so that HKS columns compare
/// at the same diffusion times.
struct NominalModel {
    TriangleMesh mesh;
    SpectralBasis basis;
    TimeGrid grid;
    HksField hks;
    CoefficientMatrix coefficients;
};

NominalModel prepare_nominal(const TriangleMesh& nominal,
                             const PipelineConfig& config,
                             const EigenSolverOptions& solver = {});

struct MatchResult {
    SpectralBasis basis;  // suspect basis
    HksField hks;         // suspect HKS on the nominal grid
    FunctionalMapC cmap;
    PointMap map;         // suspect -> nominal
};

/// Map a suspect mesh onto the nominal. `roi` (on suspect vertices) limits
/// the point-map recovery; the functional map always uses the full meshes.
MatchResult match_to_nominal(const TriangleMesh& suspect,
                             const NominalModel& nominal,
                             const PipelineConfig& config,
                             const std::optional<VertexMask>& roi = std::nullopt,
                             int threads = 1,
                             const EigenSolverOptions& solver = {});

} // namespace fmloc
