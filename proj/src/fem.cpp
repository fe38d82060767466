#include "fmloc/fem.hpp"

#include "fmloc/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace fmloc {

namespace {

// Reference triangle (0,0), (1,0), (0,1). Shape functions are expanded in the
// monomials xi^a eta^b with a + b <= degree, so every element integral is a
// finite sum of exact monomial integrals  a! b! / (a + b + 2)!.
struct ReferenceElement {
    Eigen::MatrixXd mass;  // int N_i N_j
    Eigen::MatrixXd s00;   // int dN_i/dxi  dN_j/dxi
    Eigen::MatrixXd s01;   // int dN_i/dxi  dN_j/deta
    Eigen::MatrixXd s11;   // int dN_i/deta dN_j/deta
};

double factorial(int k)
{
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

double monomial_integral(int a, int b)
{
    return factorial(a) * factorial(b) / factorial(a + b + 2);
}

std::vector<std::array<double, 2>> reference_nodes(FemDegree degree)
{
    std::vector<std::array<double, 2>> nodes = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    if (degree == FemDegree::P3) {
        const double t = 1.0 / 3.0, u = 2.0 / 3.0;
        nodes.push_back({t, 0.0});  // e01 near v0
        nodes.push_back({u, 0.0});  // e01 near v1
        nodes.push_back({u, t});    // e12 near v1
        nodes.push_back({t, u});    // e12 near v2
        nodes.push_back({0.0, u});  // e20 near v2
        nodes.push_back({0.0, t});  // e20 near v0
        nodes.push_back({t, t});    // centroid
    }
    return nodes;
}

ReferenceElement build_reference(FemDegree degree)
{
    const int order = degree == FemDegree::P1 ? 1 : 3;
    std::vector<std::array<int, 2>> monos;
    for (int total = 0; total <= order; ++total) {
        for (int b = 0; b <= total; ++b) monos.push_back({total - b, b});
    }
    const auto nodes = reference_nodes(degree);
    const auto nb = static_cast<Eigen::Index>(nodes.size());

    Eigen::MatrixXd vander(nb, nb);
    for (Eigen::Index r = 0; r < nb; ++r) {
        for (Eigen::Index c = 0; c < nb; ++c) {
            const auto& m = monos[static_cast<std::size_t>(c)];
            vander(r, c) = std::pow(nodes[static_cast<std::size_t>(r)][0], m[0]) *
                           std::pow(nodes[static_cast<std::size_t>(r)][1], m[1]);
        }
    }
    // Column i holds the monomial coefficients of shape function N_i.
    const Eigen::MatrixXd coeff = vander.fullPivLu().inverse();

    ReferenceElement ref;
    ref.mass = Eigen::MatrixXd::Zero(nb, nb);
    ref.s00 = Eigen::MatrixXd::Zero(nb, nb);
    ref.s01 = Eigen::MatrixXd::Zero(nb, nb);
    ref.s11 = Eigen::MatrixXd::Zero(nb, nb);
    for (Eigen::Index i = 0; i < nb; ++i) {
        for (Eigen::Index j = 0; j < nb; ++j) {
            double m = 0, s00 = 0, s01 = 0, s11 = 0;
            for (Eigen::Index p = 0; p < nb; ++p) {
                const auto [ap, bp] = monos[static_cast<std::size_t>(p)];
                for (Eigen::Index q = 0; q < nb; ++q) {
                    const auto [aq, bq] = monos[static_cast<std::size_t>(q)];
                    const double cc = coeff(p, i) * coeff(q, j);
                    if (cc == 0.0) continue;
                    m += cc * monomial_integral(ap + aq, bp + bq);
                    if (ap > 0 && aq > 0) s00 += cc * ap * aq * monomial_integral(ap + aq - 2, bp + bq);
                    if (ap > 0 && bq > 0) s01 += cc * ap * bq * monomial_integral(ap + aq - 1, bp + bq - 1);
                    if (bp > 0 && bq > 0) s11 += cc * bp * bq * monomial_integral(ap + aq, bp + bq - 2);
                }
            }
            ref.mass(i, j) = m;
            ref.s00(i, j) = s00;
            ref.s01(i, j) = s01;
            ref.s11(i, j) = s11;
        }
    }
    return ref;
}

const ReferenceElement& reference(FemDegree degree)
{
    static const ReferenceElement p1 = build_reference(FemDegree::P1);
    static const ReferenceElement p3 = build_reference(FemDegree::P3);
    return degree == FemDegree::P1 ? p1 : p3;
}

} // namespace

std::string to_string(FemDegree degree) { return degree == FemDegree::P1 ? "p1" : "p3"; }

FemDegree fem_degree_from_string(const std::string& name)
{
    if (name == "p1" || name == "P1" || name == "linear") return FemDegree::P1;
    if (name == "p3" || name == "P3" || name == "cubic") return FemDegree::P3;
    throw InvalidArgument("unknown FEM degree '" + name + "' (expected p1 or p3)");
}

ElementMatrices element_matrices(const Vec3& a, const Vec3& b, const Vec3& c, FemDegree degree)
{
    const auto& ref = reference(degree);
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    // Metric of the affine map from the reference triangle.
    const double g00 = e1.dot(e1), g01 = e1.dot(e2), g11 = e2.dot(e2);
    const double det = g00 * g11 - g01 * g01;
    const double jac = std::sqrt(std::max(det, 0.0));
    if (!(jac > 0.0)) throw DegenerateElement("triangle with zero area reached assembly");
    const double i00 = g11 / det, i01 = -g01 / det, i11 = g00 / det;

    ElementMatrices em;
    em.stiffness = jac * (i00 * ref.s00 + i01 * (ref.s01 + ref.s01.transpose()) + i11 * ref.s11);
    em.mass = jac * ref.mass;
    return em;
}

OperatorPair assemble(const TriangleMesh& mesh, FemDegree degree)
{
    const Index n = mesh.num_vertices();
    const double tol = mesh.area_tolerance();

    std::vector<bool> referenced(static_cast<std::size_t>(n), false);
    for (const auto& t : mesh.faces()) {
        for (Index v : t) referenced[static_cast<std::size_t>(v)] = true;
    }
    for (Index v = 0; v < n; ++v) {
        if (!referenced[static_cast<std::size_t>(v)]) {
            throw ValidationError("vertex " + std::to_string(v) + " belongs to no face");
        }
    }

    // Unique undirected edges in lexicographic order.
    std::vector<std::pair<Index, Index>> edges;
    if (degree == FemDegree::P3) {
        edges.reserve(static_cast<std::size_t>(mesh.num_faces()) * 3);
        for (const auto& t : mesh.faces()) {
            for (int k = 0; k < 3; ++k) edges.push_back(std::minmax(t[k], t[(k + 1) % 3]));
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    }
    auto edge_id = [&edges](Index a, Index b) {
        const std::pair<Index, Index> key = std::minmax(a, b);
        const auto it = std::lower_bound(edges.begin(), edges.end(), key);
        return static_cast<Index>(it - edges.begin());
    };

    const Index num_edges = static_cast<Index>(edges.size());
    const Index dofs = degree == FemDegree::P1 ? n : n + 2 * num_edges + mesh.num_faces();

    OperatorPair ops;
    ops.num_vertices = n;
    ops.dof_to_vertex.assign(static_cast<std::size_t>(dofs), -1);
    for (Index v = 0; v < n; ++v) ops.dof_to_vertex[static_cast<std::size_t>(v)] = v;

    const int nb = degree == FemDegree::P1 ? 3 : 10;
    std::vector<Eigen::Triplet<double>> kt, mt;
    kt.reserve(static_cast<std::size_t>(mesh.num_faces() * nb * nb));
    mt.reserve(static_cast<std::size_t>(mesh.num_faces() * nb * nb));
    std::vector<Index> local(static_cast<std::size_t>(nb));

    for (Index f = 0; f < mesh.num_faces(); ++f) {
        const auto& t = mesh.face(f);
        if (!(mesh.face_area(f) > tol)) {
            std::ostringstream msg;
            msg << "face " << f << " has area below tolerance " << tol;
            throw DegenerateElement(msg.str());
        }
        local[0] = t[0];
        local[1] = t[1];
        local[2] = t[2];
        if (degree == FemDegree::P3) {
            // Edge (vi, vj): first global edge dof sits near the lower vertex index.
            const std::array<std::array<int, 2>, 3> local_edges = {{{0, 1}, {1, 2}, {2, 0}}};
            for (int e = 0; e < 3; ++e) {
                const Index vi = t[local_edges[e][0]];
                const Index vj = t[local_edges[e][1]];
                const Index base = n + 2 * edge_id(vi, vj);
                const bool forward = vi < vj;
                local[3 + 2 * e] = forward ? base : base + 1;
                local[4 + 2 * e] = forward ? base + 1 : base;
            }
            local[9] = n + 2 * num_edges + f;
        }
        const auto em = element_matrices(mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]), degree);
        for (int i = 0; i < nb; ++i) {
            for (int j = 0; j < nb; ++j) {
                kt.emplace_back(local[i], local[j], em.stiffness(i, j));
                mt.emplace_back(local[i], local[j], em.mass(i, j));
            }
        }
    }
    ops.stiffness.resize(dofs, dofs);
    ops.mass.resize(dofs, dofs);
    ops.stiffness.setFromTriplets(kt.begin(), kt.end());
    ops.mass.setFromTriplets(mt.begin(), mt.end());
    ops.stiffness.makeCompressed();
    ops.mass.makeCompressed();
    return ops;
}

} // namespace fmloc
