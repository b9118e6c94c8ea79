#pragma once

#include "toda/algebra.hpp"

#include <functional>
#include <random>

namespace toda {

enum class CoordKind { Conformal, Asymptotic };

struct GeometrySpec {
    Tag tag = Tag::CP2;
    CoordKind kind = CoordKind::Conformal;
    InvolutionSpec involution;
    bool has_signature = true;
    Mat3 signature = Mat3::Identity();  // Hermitian form <x,y> = x^T S conj(y)
    double H = 0.0;
    std::vector<cd> lambda_samples;
};

/// Descriptor with default lambda samples: 16th roots of unity (conformal), {1/2, 1, 2} (asymptotic).
GeometrySpec make_geometry(Tag tag);

inline bool is_conformal(const GeometrySpec& g) { return g.kind == CoordKind::Conformal; }
inline bool is_affine(Tag t) { return t == Tag::AffDefEll || t == Tag::AffDefHyp || t == Tag::AffIndef; }

/// omega_a, omega_b are the real partials along the grid coordinates (x, y) or (u, v).
struct PointData {
    double omega = 0.0;
    double omega_a = 0.0;
    double omega_b = 0.0;
    cd Q = 1.0;
    cd R = 1.0;
};

/// Complex-valued sampler over grid coordinates (a, b).
using Sampler = std::function<cd(double, double)>;

Sampler constant_sampler(cd value);
/// sum_k c_k z^k with z = a + i b.
Sampler poly_z_sampler(std::vector<cd> coeffs);
/// sum_k c_k a^k, ignoring b.
Sampler poly_a_sampler(std::vector<cd> coeffs);
/// sum_k c_k b^k, ignoring a.
Sampler poly_b_sampler(std::vector<cd> coeffs);
/// Complex conjugate of another sampler.
Sampler conj_sampler(Sampler s);

struct LaxPair {
    Mat3 U;
    Mat3 V;
};

/// Coefficients of alpha = (lambda^{-1} Um1 + U0) da + (V0 + lambda V1) db.
struct GradedAlpha {
    Mat3 Um1;
    Mat3 U0;
    Mat3 V0;
    Mat3 V1;
};

/// Throws RealityViolation when Q, R are off the axis the tag requires.
void check_point_reality(const GeometrySpec& geom, const PointData& p);

GradedAlpha graded_alpha(const GeometrySpec& geom, const PointData& p);
LaxPair build_alpha(const GeometrySpec& geom, const PointData& p, cd lambda);

/// Pointwise Tzitzeica left-hand side given the mixed derivative
/// (omega_{z zbar} for conformal tags, omega_{uv} for asymptotic ones).
double tzitzeica_lhs(Tag tag, double omega, double omega_ab, cd Q, cd R);

/// Discrete left-hand side over the grid; second-order central inside,
/// second-order one-sided on the boundary.
ScalarField tzitzeica_residual(const GeometrySpec& geom, const ScalarField& omega, const Sampler& Q,
                               const Sampler& R, Exec exec = Exec::Parallel);

struct SymmetryDefects {
    double twist = 0.0;
    double reality = 0.0;
};

/// Off-axis Q, R are measured here rather than rejected.
SymmetryDefects symmetry_defects(const GeometrySpec& geom, const PointData& p);

/// Random admissible data for the tag.
PointData random_point_data(Tag tag, std::mt19937_64& rng);

/// Second-order derivative helpers on a scalar field (one-sided at the edges).
ScalarField diff_a(const ScalarField& f);
ScalarField diff_b(const ScalarField& f);

/// Max of |d_a V - d_b U + [U, V]| over points at least two cells from the edge.
double flatness_defect(const GeometrySpec& geom, const ScalarField& omega, const Sampler& Q,
                       const Sampler& R, cd lambda);

}  // namespace toda
