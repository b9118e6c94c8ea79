#pragma once

#include "toda/geometry.hpp"

#include <functional>
#include <optional>

namespace toda {

struct EllipticOptions {
    int max_iterations = 50;
    double tol = 1e-10;
};

struct EllipticResult {
    ScalarField omega;
    int iterations = 0;
    std::vector<double> history;  // max-norm residual before each step
    double certificate = 0.0;     // recheck through tzitzeica_residual at interior points
};

/// Damped Newton for the conformal Tzitzeica equation with Dirichlet data taken
/// from the boundary of `boundary`; solves residual + forcing = 0 at interior points.
EllipticResult solve_elliptic(const GeometrySpec& geom, const Sampler& Q, const ScalarField& boundary,
                              const std::optional<ScalarField>& forcing = std::nullopt,
                              const EllipticOptions& opts = {});

struct GoursatData {
    std::vector<double> u_axis;  // omega(u_i, v0)
    std::vector<double> v_axis;  // omega(u0, v_j)
};

GoursatData zero_goursat(const Grid& grid);

struct HyperbolicOptions {
    double blowup_guard = 50.0;
    int max_corrections = 50;
    double corrector_tol = 1e-14;
};

struct HyperbolicResult {
    ScalarField omega;
    double scheme_residual = 0.0;  // max defect of the cell equations
    double certificate = 0.0;      // tzitzeica_residual at interior points
};

using RealForcing = std::function<double(double, double)>;

/// Characteristic march from the two axes; the cell equation is the trapezoidal
/// integral form, solved per cell by a predictor and iterated corrector.
HyperbolicResult solve_hyperbolic(const GeometrySpec& geom, const Sampler& Q, const Sampler& R,
                                  const GoursatData& data, const Grid& grid,
                                  const RealForcing& forcing = nullptr, const HyperbolicOptions& opts = {},
                                  Exec exec = Exec::Parallel);

}  // namespace toda
