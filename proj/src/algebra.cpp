#include "toda/algebra.hpp"

#include <algorithm>
#include <cmath>

namespace toda {

cd eps() { return std::polar(1.0, kPi / 3.0); }

cd eps_pow(int k) {
    static const std::array<cd, 6> table = [] {
        std::array<cd, 6> t{};
        t[0] = 1.0;
        for (int m = 1; m < 6; ++m) t[m] = t[m - 1] * eps();
        return t;
    }();
    return table[mod6(k)];
}

Mat3 unit_matrix(int i, int j) {
    Mat3 E = Mat3::Zero();
    E(i, j) = 1.0;
    return E;
}

Mat3 P0() {
    Mat3 M = Mat3::Zero();
    M(0, 1) = 1.0;
    M(1, 0) = 1.0;
    M(2, 2) = -1.0;
    return M;
}

Mat3 I21() {
    Mat3 M = Mat3::Identity();
    M(2, 2) = -1.0;
    return M;
}

Mat3 sigma_conjugator() {
    Mat3 M = Mat3::Zero();
    M(0, 1) = eps_pow(2);
    M(1, 0) = eps_pow(4);
    M(2, 2) = 1.0;
    return M;
}

Mat3 Omega() {
    Mat3 M = Mat3::Zero();
    M(0, 0) = eps_pow(4);
    M(1, 1) = eps_pow(2);
    M(2, 2) = 1.0;
    return M;
}

Mat3 sigma_hat(const Mat3& X) {
    static const Mat3 P = sigma_conjugator();
    return -(P * X.transpose() * P);
}

Mat3 cofactor(const Mat3& g) {
    Mat3 C;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
            const int j1 = (j + 1) % 3, j2 = (j + 2) % 3;
            C(i, j) = g(i1, j1) * g(i2, j2) - g(i1, j2) * g(i2, j1);
        }
    }
    return C;
}

Mat3 sigma_hat_group(const Mat3& g) {
    static const Mat3 P = sigma_conjugator();
    return P * g.transpose().inverse() * P;
}

Mat3 eig_project(const Mat3& X, int j) {
    Mat3 acc = Mat3::Zero();
    Mat3 cur = X;
    for (int m = 0; m < 6; ++m) {
        acc += eps_pow(-j * m) * cur;
        cur = sigma_hat(cur);
    }
    return acc / 6.0;
}

// ---------------------------------------------------------------- loops

LaurentLoop::LaurentLoop(int N, bool twisted)
    : N_(N), twisted_(twisted), c_(static_cast<std::size_t>(2 * N + 1), Mat3::Zero()) {
    if (N < 0) throw std::invalid_argument("negative truncation degree");
}

LaurentLoop LaurentLoop::constant(const Mat3& A, int N) {
    LaurentLoop L(N);
    L.at(0) = A;
    return L;
}

const Mat3& LaurentLoop::operator[](int k) const {
    static const Mat3 zero = Mat3::Zero();
    if (k < -N_ || k > N_) return zero;
    return c_[static_cast<std::size_t>(k + N_)];
}

Mat3& LaurentLoop::at(int k) {
    if (k < -N_ || k > N_) throw std::out_of_range("loop degree outside truncation range");
    return c_[static_cast<std::size_t>(k + N_)];
}

int LaurentLoop::min_degree(double tol) const {
    for (int k = -N_; k <= N_; ++k)
        if ((*this)[k].norm() > tol) return k;
    return N_ + 1;
}

int LaurentLoop::max_degree(double tol) const {
    for (int k = N_; k >= -N_; --k)
        if ((*this)[k].norm() > tol) return k;
    return -N_ - 1;
}

LaurentLoop LaurentLoop::resized(int N) const {
    LaurentLoop out(N, twisted_);
    double dropped = 0.0;
    for (int k = -N_; k <= N_; ++k) {
        if (k >= -N && k <= N)
            out.at(k) = (*this)[k];
        else
            dropped += (*this)[k].squaredNorm();
    }
    out.tail_ = tail_ + std::sqrt(dropped);
    return out;
}

Mat3 loop_eval(const LaurentLoop& L, cd lambda) {
    if (lambda == cd(0.0)) throw Error(ErrorKind::ZeroLambda, "loop evaluated at lambda = 0");
    Mat3 acc = Mat3::Zero();
    cd p = std::pow(lambda, -L.N());
    for (int k = -L.N(); k <= L.N(); ++k) {
        acc += L[k] * p;
        p *= lambda;
    }
    return acc;
}

LaurentLoop loop_mul(const LaurentLoop& A, const LaurentLoop& B) {
    const int N = std::max(A.N(), B.N());
    LaurentLoop out(N, A.twisted() && B.twisted());
    std::vector<Mat3> full(static_cast<std::size_t>(2 * (A.N() + B.N()) + 1), Mat3::Zero());
    const int off = A.N() + B.N();
    for (int p = -A.N(); p <= A.N(); ++p) {
        const Mat3& a = A[p];
        if (a.isZero(0.0)) continue;
        for (int q = -B.N(); q <= B.N(); ++q) {
            const Mat3& b = B[q];
            if (b.isZero(0.0)) continue;
            full[static_cast<std::size_t>(p + q + off)].noalias() += a * b;
        }
    }
    double dropped = 0.0;
    for (int k = -off; k <= off; ++k) {
        const Mat3& c = full[static_cast<std::size_t>(k + off)];
        if (k >= -N && k <= N)
            out.at(k) = c;
        else
            dropped += c.squaredNorm();
    }
    out.set_tail(A.tail() + B.tail() + std::sqrt(dropped));
    return out;
}

LaurentLoop loop_add(const LaurentLoop& A, const LaurentLoop& B) {
    const int N = std::max(A.N(), B.N());
    LaurentLoop out(N, A.twisted() && B.twisted());
    for (int k = -N; k <= N; ++k) out.at(k) = A[k] + B[k];
    out.set_tail(A.tail() + B.tail());
    return out;
}

LaurentLoop loop_scale(const LaurentLoop& A, cd s) {
    LaurentLoop out(A.N(), A.twisted());
    for (int k = -A.N(); k <= A.N(); ++k) out.at(k) = s * A[k];
    out.set_tail(std::abs(s) * A.tail());
    return out;
}

LaurentLoop loop_mul_const(const LaurentLoop& A, const Mat3& M) {
    LaurentLoop out(A.N());
    for (int k = -A.N(); k <= A.N(); ++k) out.at(k) = A[k] * M;
    out.set_tail(A.tail() * M.norm());
    return out;
}

LaurentLoop const_mul_loop(const Mat3& M, const LaurentLoop& A) {
    LaurentLoop out(A.N());
    for (int k = -A.N(); k <= A.N(); ++k) out.at(k) = M * A[k];
    out.set_tail(A.tail() * M.norm());
    return out;
}

LaurentLoop loop_transpose(const LaurentLoop& A) {
    LaurentLoop out(A.N(), A.twisted());
    for (int k = -A.N(); k <= A.N(); ++k) out.at(k) = A[k].transpose();
    out.set_tail(A.tail());
    return out;
}

LaurentLoop loop_cofactor(const LaurentLoop& A) {
    const int N = A.N();
    const int off = 2 * N;
    std::vector<Mat3> full(static_cast<std::size_t>(4 * N + 1), Mat3::Zero());
    for (int p = -N; p <= N; ++p) {
        const Mat3& a = A[p];
        if (a.isZero(0.0)) continue;
        for (int q = -N; q <= N; ++q) {
            const Mat3& b = A[q];
            if (b.isZero(0.0)) continue;
            Mat3& dst = full[static_cast<std::size_t>(p + q + off)];
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                    const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
                    const int j1 = (j + 1) % 3, j2 = (j + 2) % 3;
                    dst(i, j) += a(i1, j1) * b(i2, j2) - a(i1, j2) * b(i2, j1);
                }
            }
        }
    }
    LaurentLoop out(N);
    double dropped = 0.0;
    for (int k = -off; k <= off; ++k) {
        const Mat3& c = full[static_cast<std::size_t>(k + off)];
        if (k >= -N && k <= N)
            out.at(k) = c;
        else
            dropped += c.squaredNorm();
    }
    out.set_tail(2.0 * A.tail() + std::sqrt(dropped));
    return out;
}

LaurentLoop loop_inverse(const LaurentLoop& A) {
    LaurentLoop out = loop_transpose(loop_cofactor(A));
    out.set_twisted(A.twisted());
    return out;
}

LaurentLoop loop_exp(const LaurentLoop& A) {
    double size = 0.0;
    for (int k = -A.N(); k <= A.N(); ++k) size += A[k].norm();
    int squarings = 0;
    while (size > 0.5) {
        size *= 0.5;
        ++squarings;
    }
    LaurentLoop X = loop_scale(A, std::ldexp(1.0, -squarings));
    LaurentLoop term = LaurentLoop::identity(A.N());
    LaurentLoop sum = term;
    for (int n = 1; n < 60; ++n) {
        term = loop_scale(loop_mul(term, X), 1.0 / n);
        sum = loop_add(sum, term);
        double tn = 0.0;
        for (int k = -A.N(); k <= A.N(); ++k) tn += term[k].norm();
        if (tn < 1e-18) break;
    }
    for (int s = 0; s < squarings; ++s) sum = loop_mul(sum, sum);
    sum.set_twisted(A.twisted());
    return sum;
}

LaurentLoop loop_sigma(const LaurentLoop& L) {
    // sigma_hat(L(eps^{-1} lambda)): degree k picks up eps^{-k}.
    LaurentLoop out(L.N(), L.twisted());
    for (int k = -L.N(); k <= L.N(); ++k) out.at(k) = eps_pow(-k) * sigma_hat(L[k]);
    out.set_tail(L.tail());
    return out;
}

double twist_check(const LaurentLoop& L) {
    double d = 0.0;
    for (int k = -L.N(); k <= L.N(); ++k) {
        const Mat3& c = L[k];
        d = std::max(d, (c - eig_project(c, k)).norm());
    }
    return d;
}

double loop_distance(const LaurentLoop& A, const LaurentLoop& B) {
    const int N = std::max(A.N(), B.N());
    double d = 0.0;
    for (int k = -N; k <= N; ++k) d = std::max(d, (A[k] - B[k]).norm());
    return d;
}

// ---------------------------------------------------------------- involutions

const char* tag_name(Tag tag) {
    switch (tag) {
        case Tag::CP2: return "CP2";
        case Tag::CH2: return "CH2";
        case Tag::CH21: return "CH21";
        case Tag::AffDefEll: return "AffDefEll";
        case Tag::AffDefHyp: return "AffDefHyp";
        case Tag::AffIndef: return "AffIndef";
    }
    return "?";
}

Tag tag_from_name(const std::string& name) {
    for (Tag t : kAllTags)
        if (name == tag_name(t)) return t;
    throw Error(ErrorKind::ConfigError, "geometry: unknown tag '" + name + "'");
}

InvolutionSpec involution_for(Tag tag) {
    InvolutionSpec s;
    s.tag = tag;
    switch (tag) {
        case Tag::CP2:
            s.conjugator = Mat3::Identity();
            s.transpose = true;
            s.lambda_map = LambdaMap::InverseConjugate;
            break;
        case Tag::CH2:
            s.conjugator = I21();
            s.transpose = true;
            s.lambda_map = LambdaMap::InverseConjugate;
            break;
        case Tag::CH21:
            s.conjugator = P0();
            s.transpose = true;
            s.lambda_map = LambdaMap::Conjugate;
            break;
        case Tag::AffDefEll:
            s.conjugator = P0();
            s.transpose = false;
            s.lambda_map = LambdaMap::InverseConjugate;
            break;
        case Tag::AffDefHyp:
            s.conjugator = I21() * P0();
            s.transpose = false;
            s.lambda_map = LambdaMap::InverseConjugate;
            break;
        case Tag::AffIndef:
            s.conjugator = Mat3::Identity();
            s.transpose = false;
            s.lambda_map = LambdaMap::Conjugate;
            break;
    }
    s.sign = s.transpose ? -1 : 1;
    return s;
}

Mat3 tau_hat(const InvolutionSpec& spec, const Mat3& X) {
    const Mat3& J = spec.conjugator;
    const Mat3 Y = spec.transpose ? Mat3(X.adjoint()) : Mat3(X.conjugate());
    return static_cast<double>(spec.sign) * (J * Y * J.inverse());
}

Mat3 tau_hat_group(const InvolutionSpec& spec, const Mat3& g) {
    const Mat3& J = spec.conjugator;
    const Mat3 Y = spec.transpose ? Mat3(g.adjoint().inverse()) : Mat3(g.conjugate());
    return J * Y * J.inverse();
}

cd involution_lambda(const InvolutionSpec& spec, cd lambda) {
    if (spec.lambda_map == LambdaMap::Conjugate) return std::conj(lambda);
    return 1.0 / std::conj(lambda);
}

namespace {

int image_degree(const InvolutionSpec& spec, int k) {
    return spec.lambda_map == LambdaMap::InverseConjugate ? -k : k;
}

}  // namespace

LaurentLoop apply_involution(const InvolutionSpec& spec, const LaurentLoop& L) {
    LaurentLoop out(L.N(), L.twisted());
    for (int k = -L.N(); k <= L.N(); ++k) out.at(image_degree(spec, k)) = tau_hat(spec, L[k]);
    out.set_tail(L.tail());
    return out;
}

LaurentLoop apply_involution_group(const InvolutionSpec& spec, const LaurentLoop& L) {
    LaurentLoop conjd(L.N(), L.twisted());
    for (int k = -L.N(); k <= L.N(); ++k) conjd.at(image_degree(spec, k)) = L[k].conjugate();
    conjd.set_tail(L.tail());
    const Mat3& J = spec.conjugator;
    const Mat3 Jinv = J.inverse();
    LaurentLoop core = spec.transpose ? loop_cofactor(conjd) : conjd;
    LaurentLoop out = const_mul_loop(J, loop_mul_const(core, Jinv));
    out.set_twisted(L.twisted());
    out.set_tail(core.tail());
    return out;
}

}  // namespace toda
