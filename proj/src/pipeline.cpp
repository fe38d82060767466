#include "fmloc/pipeline.hpp"

#include "fmloc/error.hpp"

namespace fmloc {

NominalModel prepare_nominal(const TriangleMesh& nominal, const PipelineConfig& config, const EigenSolverOptions& solver)
{
    config.validate();
    NominalModel model{nominal, spectral_basis(nominal, config.degree, config.p, solver), {}, {}, {}};
    model.grid = time_grid(model.basis.eigenvalues, config.K, config.epsilon);
    model.hks = hks_field(model.basis, model.grid, config.hks_scaling);
    model.coefficients = coefficients(model.basis, model.hks);
    return model;
}

MatchResult match_to_nominal(const TriangleMesh& suspect,
                             const NominalModel& nominal,
                             const PipelineConfig& config,
                             const std::optional<VertexMask>& roi,
                             int threads,
                             const EigenSolverOptions& solver)
{
    config.validate();
    if (nominal.basis.size() != config.p || nominal.basis.degree != config.degree ||
        nominal.grid.size() != config.K) {
        throw ConfigMismatch("nominal model was prepared with a different configuration");
    }
    MatchResult r{spectral_basis(suspect, config.degree, config.p, solver), {}, {}, {}};
    r.hks = hks_field(r.basis, nominal.grid, config.hks_scaling);
    const auto coeff = coefficients(r.basis, r.hks);
    r.cmap = functional_map(r.basis, coeff, nominal.basis, nominal.coefficients, config.q);
    r.map = recover_point_map(r.basis, nominal.basis, r.cmap, r.hks, nominal.hks, config.m, roi, threads);
    return r;
}

} // namespace fmloc
