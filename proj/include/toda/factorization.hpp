#pragma once

#include "toda/frames.hpp"

#include <map>

namespace toda {

struct LoopFactorPair {
    LaurentLoop plus;   // L_+ (Birkhoff) or V_+ (Iwasawa)
    LaurentLoop other;  // L_- (Birkhoff) or the real-form factor F (Iwasawa)
    double residual = 0.0;
    double reality = 0.0;  // Iwasawa only: max |tau(F) - F| on the unit circle
    double condition = 0.0;
};

struct SplitOptions {
    double cond_limit = 1e8;
    double tol = 1e-9;
    double reality_tol = 1e-8;
    int circle_samples = 48;
};

/// L = L_+ L_-^{-1} with L_-(inf) = I, from the block-Toeplitz system for L_-.
/// Throws SingularCell above the condition limit and NoConvergence when reassembly fails.
LoopFactorPair birkhoff_split(const LaurentLoop& L, const SplitOptions& opts = {});

/// L = F V_+ with tau(F) = F and V_+(0) = diag(s, 1/s, 1), s > 0.
LoopFactorPair iwasawa_split(const LaurentLoop& L, const InvolutionSpec& spec, const SplitOptions& opts = {});

using MatSampler = std::function<Mat3(cd)>;

/// Degree -> coefficient function of one coordinate.
struct Potential {
    std::map<int, MatSampler> coeffs;

    LaurentLoop at(cd z, int N) const;
};

struct PotentialPair {
    Potential eta1;  // du part, degrees >= -1
    Potential eta2;  // dv part, degrees <= 1
};

/// Grading, lowest-degree and (for pairs) tau_hat-fixedness checks at the sample points.
void check_potential(const Potential& eta, const std::vector<cd>& samples, int lowest);
void check_potential_pair(const PotentialPair& pair, const InvolutionSpec& spec, const std::vector<double>& u,
                          const std::vector<double>& v);

/// RK4 solution of dC = C eta along the polyline through `path`, C(path[0]) = base.
std::vector<LaurentLoop> integrate_potential(const Potential& eta, const std::vector<cd>& path,
                                             const LaurentLoop& base, int substeps = 4);

struct DpwOptions {
    int N = 8;
    int retry_N = 16;
    std::vector<cd> lambdas = {1.0};
    int substeps = 4;
    double tol = 1e-5;
    std::optional<Sampler> expected_Q;
    std::optional<Sampler> expected_R;
    SplitOptions split{1e8, 1e-11, 1e-8, 48};
    Exec exec = Exec::Parallel;
};

struct DpwResult {
    std::vector<FrameField> frames;  // one per lambda
    SurfaceMesh mesh;                // at lambdas[0]
    ScalarField omega;               // recovered metric function
    ValidationReport report;
    Field<unsigned char> mask;       // 1 where the split failed
    double max_residual = 0.0;
    double max_reality = 0.0;
    double matching_defect = 0.0;    // asymptotic only
    int retries = 0;
};

DpwResult dpw_conformal(const GeometrySpec& geom, const Potential& eta, const Grid& grid, const DpwOptions& opts = {});
DpwResult dpw_asymptotic(const GeometrySpec& geom, const PotentialPair& pair, const Grid& grid,
                         const DpwOptions& opts = {});

}  // namespace toda
