#pragma once

#include "toda/core.hpp"

#include <array>
#include <string>

namespace toda {

/// The primitive sixth root e^{i pi/3}; every phase in the library derives from it.
cd eps();
cd eps_pow(int k);

Mat3 unit_matrix(int i, int j);  // 0-based E_ij
Mat3 sigma_conjugator();         // P = diag(eps^2, eps^4, -1) P0
Mat3 P0();
Mat3 I21();
Mat3 Omega();                    // diag(eps^4, eps^2, 1)

/// sigma_hat(X) = -P X^T P.
Mat3 sigma_hat(const Mat3& X);
/// Group-level sigma_hat(g) = P (g^T)^{-1} P.
Mat3 sigma_hat_group(const Mat3& g);

inline int mod6(int j) { return ((j % 6) + 6) % 6; }

/// Component of X in the eps^j eigenspace of sigma_hat.
Mat3 eig_project(const Mat3& X, int j);

/// Cofactor matrix; equals (g^T)^{-1} when det g = 1.
Mat3 cofactor(const Mat3& g);

/// Truncated Laurent series sum_{k=-N..N} c_k lambda^k.
class LaurentLoop {
public:
    LaurentLoop() : LaurentLoop(8) {}
    explicit LaurentLoop(int N, bool twisted = false);

    static LaurentLoop constant(const Mat3& A, int N);
    static LaurentLoop identity(int N) { return constant(Mat3::Identity(), N); }

    int N() const { return N_; }
    bool twisted() const { return twisted_; }
    void set_twisted(bool t) { twisted_ = t; }

    /// Norm of coefficients dropped by truncation while producing this loop.
    double tail() const { return tail_; }
    void set_tail(double t) { tail_ = t; }

    const Mat3& operator[](int k) const;  // zero outside [-N, N]
    Mat3& at(int k);                      // throws outside [-N, N]
    void set(int k, const Mat3& M) { at(k) = M; }

    int min_degree(double tol = 0.0) const;
    int max_degree(double tol = 0.0) const;

    /// Same coefficients with a new truncation degree (tail accumulates).
    LaurentLoop resized(int N) const;

private:
    int N_;
    bool twisted_;
    double tail_ = 0.0;
    std::vector<Mat3> c_;
};

Mat3 loop_eval(const LaurentLoop& L, cd lambda);
LaurentLoop loop_mul(const LaurentLoop& A, const LaurentLoop& B);
LaurentLoop loop_add(const LaurentLoop& A, const LaurentLoop& B);
LaurentLoop loop_scale(const LaurentLoop& A, cd s);
LaurentLoop loop_mul_const(const LaurentLoop& A, const Mat3& M);   // A*M
LaurentLoop const_mul_loop(const Mat3& M, const LaurentLoop& A);   // M*A
LaurentLoop loop_transpose(const LaurentLoop& A);
LaurentLoop loop_cofactor(const LaurentLoop& A);
/// Inverse of an SL3 loop through the adjugate.
LaurentLoop loop_inverse(const LaurentLoop& A);
/// exp(A) by Taylor series in loop arithmetic.
LaurentLoop loop_exp(const LaurentLoop& A);
/// The loop-level twist sigma(L)(lambda) = sigma_hat(L(eps^{-1} lambda)).
LaurentLoop loop_sigma(const LaurentLoop& L);
/// Maximum over degrees of |c_k - eig_project(c_k, k)|.
double twist_check(const LaurentLoop& L);
/// Maximum coefficient distance; degrees outside either range count as zero.
double loop_distance(const LaurentLoop& A, const LaurentLoop& B);

enum class Tag { CP2, CH2, CH21, AffDefEll, AffDefHyp, AffIndef };
inline constexpr std::array<Tag, 6> kAllTags = {Tag::CP2, Tag::CH2, Tag::CH21,
                                                Tag::AffDefEll, Tag::AffDefHyp, Tag::AffIndef};

const char* tag_name(Tag tag);
Tag tag_from_name(const std::string& name);  // throws ConfigError

enum class LambdaMap { InverseConjugate, Conjugate };

/// Real-form involution. Algebra level: X -> sign * J conj(X)^(T) J^{-1};
/// group level: g -> J conj(g)^(-T) J^{-1} when transpose is set, J conj(g) J^{-1} otherwise.
struct InvolutionSpec {
    Tag tag = Tag::CP2;
    Mat3 conjugator = Mat3::Identity();
    bool transpose = true;
    LambdaMap lambda_map = LambdaMap::InverseConjugate;
    int sign = -1;
};

InvolutionSpec involution_for(Tag tag);

Mat3 tau_hat(const InvolutionSpec& spec, const Mat3& X);
Mat3 tau_hat_group(const InvolutionSpec& spec, const Mat3& g);

/// Algebra-level tau on loops.
LaurentLoop apply_involution(const InvolutionSpec& spec, const LaurentLoop& L);
/// Group-level tau on loops (cofactor form for transpose types).
LaurentLoop apply_involution_group(const InvolutionSpec& spec, const LaurentLoop& L);

/// Image of a lambda sample under the involution's lambda map.
cd involution_lambda(const InvolutionSpec& spec, cd lambda);

}  // namespace toda
