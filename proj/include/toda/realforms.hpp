#pragma once

#include "toda/algebra.hpp"

#include <string>
#include <utility>

namespace toda {

/// Conjugation: X -> B conj(X) B^{-1}. Outer: X -> -Q conj(X)^T Q^{-1}.
enum class Family { Conjugation, Outer };
/// Commuting with sigma_hat, or sigma_hat tau sigma_hat = tau.
enum class Relation { Commuting, Split };

const char* family_name(Family f);
const char* relation_name(Relation r);

struct ClassificationCandidate {
    Family family = Family::Conjugation;
    Relation relation = Relation::Commuting;
    Mat3 matrix = Mat3::Identity();
    cd phase = 1.0;  // fitted constant of the first matrix relation
};

struct DefectRecord {
    std::vector<std::pair<std::string, double>> entries;
    cd phase = 1.0;

    double max() const;
    double get(const std::string& name) const;
};

/// Matrix-level relations (relative residuals, free constants fitted) plus the
/// involution and relation defects of the induced map on a real basis of sl3.
DefectRecord constraint_defects(const ClassificationCandidate& c);

/// The induced conjugate-linear map on sl3.
Mat3 apply_candidate(const ClassificationCandidate& c, const Mat3& X);

/// Normal form under scalar multiples and the moves by D = diag(d, 1/d, 1).
/// With collapse_magnitudes off only unimodular d are used.
ClassificationCandidate canonicalize(const ClassificationCandidate& c, bool collapse_magnitudes = true);

struct SearchConfig {
    std::vector<double> magnitudes = {0.25, 0.5, 1.0, 2.0, 4.0};
    int phase_root = 12;
    double tol = 1e-10;
    Exec exec = Exec::Parallel;
};

/// Exhaustive search over generalized permutation matrices whose first row entry is 1.
/// The commuting outer family is reported without magnitude moves.
std::vector<ClassificationCandidate> classify_involutions(Family family, Relation relation,
                                                          const SearchConfig& cfg = {});

/// Whether two candidates agree entrywise to tol.
bool same_matrix(const Mat3& a, const Mat3& b, double tol = 1e-8);

/// Candidate describing a geometry's involution spec.
ClassificationCandidate candidate_for(const InvolutionSpec& spec);

}  // namespace toda
