#pragma once

#include "fmloc/mesh.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fmloc {

enum class Primitive { Sphere, Box, ToothedBlock, Ellipsoid, Strip };
enum class DefectKind { Chip, Notch, Bump };

std::string to_string(Primitive p);
std::string to_string(DefectKind k);
Primitive primitive_from_string(const std::string& s);
DefectKind defect_kind_from_string(const std::string& s);

struct DefectSpec {
    DefectKind kind = DefectKind::Chip;
    /// Location in bounding-box coordinates ([0,1]^3); the defect is centred
    /// on the clean-mesh vertex closest to it.
    Vec3 center = Vec3(1.0, 0.0, 0.0);
    double radius = 0.08;  // fraction of the bounding-box diagonal
    double depth = 0.03;   // fraction of the bounding-box diagonal
};

struct PartSpec {
    Primitive primitive = Primitive::ToothedBlock;
    Index resolution = 1500;  // target vertex count
    std::optional<DefectSpec> defect;
    double noise_sigma = 0.0;  // fraction of the bounding-box diagonal
    std::uint64_t seed = 0;
};

struct GroundTruth {
    /// Defective-mesh vertex -> nominal vertex at the same resolution (identity
    /// because connectivity is shared).
    std::vector<Index> correspondence;
    VertexMask defect_mask;
    Vec3 defect_center = Vec3::Zero();  // absolute coordinates
    double defect_radius = 0.0;         // absolute length
};

struct SynthPart {
    TriangleMesh mesh;
    GroundTruth truth;
};

/// Deterministic for a fixed spec. Noise is i.i.d. Gaussian along clean-mesh
/// vertex normals with sigma = noise_sigma * diagonal; the defect moves
/// vertices strictly inside the radius along the same normals (chip and notch
/// inward, bump outward).
SynthPart generate(const PartSpec& spec);

/// Replicates with seeds base_seed .. base_seed + count - 1. `spec` must not
/// carry a defect.
std::vector<TriangleMesh> phase1_batch(const PartSpec& spec, Index count, std::uint64_t base_seed);

} // namespace fmloc
