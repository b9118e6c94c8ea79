#pragma once

#include "toda/geometry.hpp"

#include <optional>
#include <string>

namespace toda {

struct FrameField {
    Field<Mat3> frames;
    cd lambda = 1.0;
    int base_i = 0;
    int base_j = 0;
    Mat3 base_value = Mat3::Identity();
    double path_defect = 0.0;  // against the transposed integration order
    double det_drift = 0.0;    // largest |det - 1| seen before renormalization
};

struct FrameOptions {
    bool check_residual = true;
    double residual_threshold = 1e-6;
    bool path_check = true;
    Exec exec = Exec::Parallel;
};

/// RK4 along b = b0 first, then up every column; F(base) = base.
FrameField integrate_frame(const GeometrySpec& geom, const ScalarField& omega, const Sampler& Q, const Sampler& R,
                           cd lambda, const Mat3& base = Mat3::Identity(), const FrameOptions& opts = {});

enum class Representation { R3Point, HomogeneousLift };

struct SurfaceMesh {
    Field<Vec3> samples;
    Tag tag = Tag::AffIndef;
    Representation representation = Representation::R3Point;
    cd lambda = 1.0;
};

SurfaceMesh extract_surface(const GeometrySpec& geom, const FrameField& F);

struct ValidationCheck {
    std::string name;
    double defect = 0.0;
    double tol = 0.0;
    bool pass = true;
};

struct ValidationOptions {
    std::optional<Sampler> Q;
    std::optional<Sampler> R;
    double tol = 1e-5;
    const Field<unsigned char>* mask = nullptr;  // nonzero entries are excluded
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    Field<cd> cubic;    // Q for Lagrangian tags, Q^2 for affine tags
    Field<cd> cubic_r;  // -R^2 for AffIndef
    int points = 0;     // interior points that entered the statistics

    bool pass() const;
    /// Defect of the named check; throws std::out_of_range if absent.
    double defect(const std::string& name) const;
};

/// Geometric identities of the surface class, checked with 11-point central
/// differences at points at least five cells away from the boundary.
ValidationReport validate_surface(const GeometrySpec& geom, const SurfaceMesh& mesh, const ScalarField& omega,
                                  const ValidationOptions& opts = {});

/// Conjugator taking the definite affine frames to SL3(R).
Mat3 real_conjugator(Tag tag);

double imaginary_residue(const FrameField& F);

/// T F T^{-1}; throws ImaginaryResidue when the result is not real to 1e-8.
FrameField real_frame_conjugate(const GeometrySpec& geom, const FrameField& F);

}  // namespace toda
