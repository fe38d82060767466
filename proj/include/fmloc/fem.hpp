#pragma once

#include "fmloc/mesh.hpp"

#include <Eigen/SparseCore>

#include <string>
#include <vector>

namespace fmloc {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Lagrange element degree. P3 carries a node at each vertex, two per edge
/// and one per face.
enum class FemDegree { P1, P3 };

std::string to_string(FemDegree degree);
FemDegree fem_degree_from_string(const std::string& name);

/// Galerkin discretisation of the Laplace-Beltrami operator.
struct OperatorPair {
    SparseMatrix stiffness;  // symmetric positive semidefinite, constants in the kernel
    SparseMatrix mass;       // consistent (non-lumped), symmetric positive definite
    /// Mesh vertex of each dof, -1 for edge/face dofs. Vertex dofs come first
    /// and keep the mesh vertex order.
    std::vector<Index> dof_to_vertex;
    Index num_vertices = 0;

    Index num_dofs() const { return stiffness.rows(); }
};

/// Element matrices of one triangle with corners a, b, c; nodes follow the
/// local ordering v0 v1 v2 [e01 near v0, e01 near v1, e12 near v1, e12 near v2,
/// e20 near v2, e20 near v0, centroid] for P3.
struct ElementMatrices {
    Eigen::MatrixXd stiffness;
    Eigen::MatrixXd mass;
};

ElementMatrices element_matrices(const Vec3& a, const Vec3& b, const Vec3& c, FemDegree degree);

OperatorPair assemble(const TriangleMesh& mesh, FemDegree degree);

} // namespace fmloc
