#include "helpers.hpp"

#include "fmloc/error.hpp"
#include "fmloc/synth.hpp"

#include <doctest.h>

#include <map>

using namespace fmloc;

namespace {

// Every undirected edge borders exactly two faces.
bool is_closed(const TriangleMesh& mesh)
{
    std::map<std::pair<Index, Index>, int> uses;
    for (const auto& t : mesh.faces()) {
        for (int k = 0; k < 3; ++k) ++uses[std::minmax(t[k], t[(k + 1) % 3])];
    }
    for (const auto& [e, c] : uses) {
        if (c != 2) return false;
    }
    return true;
}

Index euler_characteristic(const TriangleMesh& mesh)
{
    // Closed triangle mesh: E = 3F / 2.
    return mesh.num_vertices() - 3 * mesh.num_faces() / 2 + mesh.num_faces();
}

} // namespace

TEST_SUITE("synth")
{
    TEST_CASE("sphere is a closed genus-0 surface near the requested size")
    {
        for (Index res : {500, 1500, 2500}) {
            PartSpec spec;
            spec.primitive = Primitive::Sphere;
            spec.resolution = res;
            const auto part = generate(spec);
            CHECK(std::abs(part.mesh.num_vertices() - res) <= res / 10);
            CHECK(is_closed(part.mesh));
            CHECK(euler_characteristic(part.mesh) == 2);
            for (const auto& v : part.mesh.vertices()) CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    TEST_CASE("every primitive meets the size tolerance")
    {
        for (auto prim : {Primitive::Sphere, Primitive::Box, Primitive::ToothedBlock, Primitive::Ellipsoid, Primitive::Strip}) {
            PartSpec spec;
            spec.primitive = prim;
            spec.resolution = 1500;
            const auto mesh = generate(spec).mesh;
            CAPTURE(to_string(prim));
            CHECK(mesh.num_vertices() >= 1125);
            CHECK(mesh.num_vertices() <= 1875);
            CHECK(count_components(connected_components(mesh)) == 1);
            CHECK(primitive_from_string(to_string(prim)) == prim);
        }
        CHECK_THROWS_AS(primitive_from_string("torus"), InvalidArgument);
        CHECK(defect_kind_from_string("notch") == DefectKind::Notch);
    }

    TEST_CASE("unreachable resolutions are rejected")
    {
        PartSpec spec;
        spec.primitive = Primitive::Sphere;
        spec.resolution = 5;
        CHECK_THROWS_AS(generate(spec), ResolutionUnachievable);
        spec.resolution = 2;
        CHECK_THROWS_AS(generate(spec), ResolutionUnachievable);
    }

    TEST_CASE("generation is deterministic")
    {
        PartSpec spec;
        spec.noise_sigma = 0.002;
        spec.seed = 17;
        spec.defect = DefectSpec{};
        const auto a = generate(spec);
        const auto b = generate(spec);
        CHECK(a.mesh.vertices() == b.mesh.vertices());
        CHECK(a.mesh.faces() == b.mesh.faces());
        CHECK(a.truth.defect_mask == b.truth.defect_mask);
        spec.seed = 18;
        CHECK(generate(spec).mesh.vertices() != a.mesh.vertices());
    }

    TEST_CASE("a defect only moves vertices inside its radius")
    {
        for (auto kind : {DefectKind::Chip, DefectKind::Notch, DefectKind::Bump}) {
            PartSpec spec;
            spec.primitive = Primitive::Box;
            spec.resolution = 1500;
            const auto clean = generate(spec).mesh;
            spec.defect = DefectSpec{kind, Vec3(1.0, 0.5, 0.5), 0.1, 0.05};
            const auto part = generate(spec);
            CAPTURE(to_string(kind));
            const auto normals = vertex_normals(clean);
            REQUIRE(part.truth.defect_mask.count() > 0);
            CHECK(part.truth.defect_radius == doctest::Approx(0.1 * clean.bbox_diagonal()));
            double along = 0.0;
            for (Index i = 0; i < clean.num_vertices(); ++i) {
                const auto u = static_cast<std::size_t>(i);
                const double r = (clean.vertex(i) - part.truth.defect_center).norm();
                if (part.truth.defect_mask[u]) {
                    CHECK(r < part.truth.defect_radius);
                    along += (part.mesh.vertex(i) - clean.vertex(i)).dot(normals[u]);
                } else {
                    CHECK(r >= part.truth.defect_radius);
                    CHECK(part.mesh.vertex(i) == clean.vertex(i));
                }
            }
            CHECK((kind == DefectKind::Bump ? along > 0.0 : along < 0.0));
            CHECK(part.mesh.faces() == clean.faces());
        }
    }

    TEST_CASE("box chip: centre lands on the +x face")
    {
        PartSpec spec;
        spec.primitive = Primitive::Box;
        spec.resolution = 1500;
        spec.defect = DefectSpec{DefectKind::Chip, Vec3(1.0, 0.5, 0.5), 0.05, 0.02};
        const auto part = generate(spec);
        double max_x = -1e300;
        for (const auto& v : generate(PartSpec{Primitive::Box, 1500, std::nullopt, 0.0, 0}).mesh.vertices()) {
            max_x = std::max(max_x, v.x());
        }
        CHECK(part.truth.defect_center.x() == doctest::Approx(max_x));
        CHECK(part.truth.correspondence.size() == static_cast<std::size_t>(part.mesh.num_vertices()));
        for (std::size_t i = 0; i < part.truth.correspondence.size(); ++i) CHECK(part.truth.correspondence[i] == static_cast<Index>(i));
    }

    TEST_CASE("noise has the requested scale")
    {
        PartSpec spec;
        spec.primitive = Primitive::Sphere;
        spec.resolution = 2500;
        const auto clean = generate(spec).mesh;
        spec.noise_sigma = 0.004;
        spec.seed = 3;
        const auto noisy = generate(spec).mesh;
        const auto normals = vertex_normals(clean);
        double sum = 0.0, sum2 = 0.0;
        for (Index i = 0; i < clean.num_vertices(); ++i) {
            const Vec3 d = noisy.vertex(i) - clean.vertex(i);
            const double a = d.dot(normals[static_cast<std::size_t>(i)]);
            CHECK((d - a * normals[static_cast<std::size_t>(i)]).norm() < 1e-12);
            sum += a;
            sum2 += a * a;
        }
        const double n = static_cast<double>(clean.num_vertices());
        const double sigma = 0.004 * clean.bbox_diagonal();
        CHECK(std::abs(sum / n) < 4.0 * sigma / std::sqrt(n));
        CHECK(std::sqrt(sum2 / n) == doctest::Approx(sigma).epsilon(0.06));
    }

    TEST_CASE("Phase-I batch: distinct replicates with shared connectivity")
    {
        PartSpec spec;
        spec.resolution = 800;
        spec.noise_sigma = 0.002;
        const auto batch = phase1_batch(spec, 4, 100);
        REQUIRE(batch.size() == 4);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            CHECK(batch[i].faces() == batch[0].faces());
            for (std::size_t j = i + 1; j < batch.size(); ++j) CHECK(batch[i].vertices() != batch[j].vertices());
        }
        spec.seed = 102;
        CHECK(generate(spec).mesh.vertices() == batch[2].vertices());

        spec.noise_sigma = 0.0;
        const auto quiet = phase1_batch(spec, 3, 0);
        CHECK(quiet[0].vertices() == quiet[2].vertices());

        spec.defect = DefectSpec{};
        CHECK_THROWS_AS(phase1_batch(spec, 2, 0), InvalidArgument);
    }

    TEST_CASE("parameter checks")
    {
        PartSpec spec;
        spec.noise_sigma = -1.0;
        CHECK_THROWS_AS(generate(spec), InvalidArgument);
        spec.noise_sigma = 0.0;
        spec.defect = DefectSpec{DefectKind::Bump, Vec3(0.5, 0.5, 1.0), 0.0, 0.1};
        CHECK_THROWS_AS(generate(spec), InvalidArgument);
    }
}
