#include "toda/realforms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace toda {

const char* family_name(Family f) { return f == Family::Conjugation ? "conjugation" : "outer"; }
const char* relation_name(Relation r) { return r == Relation::Commuting ? "commuting" : "split"; }

double DefectRecord::max() const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, e.second);
    return m;
}

double DefectRecord::get(const std::string& name) const {
    for (const auto& e : entries)
        if (e.first == name) return e.second;
    throw std::out_of_range("no defect named " + name);
}

namespace {

const std::vector<Mat3>& real_basis() {
    static const std::vector<Mat3> basis = [] {
        std::vector<Mat3> b;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (i != j) b.push_back(unit_matrix(i, j));
        b.push_back(unit_matrix(0, 0) - unit_matrix(1, 1));
        b.push_back(unit_matrix(1, 1) - unit_matrix(2, 2));
        const std::size_t n = b.size();
        for (std::size_t k = 0; k < n; ++k) b.push_back(cd(0.0, 1.0) * b[k]);
        return b;
    }();
    return basis;
}

// Relative residual of L = c R with the complex constant fitted by least squares.
double fitted(const Mat3& L, const Mat3& R, cd& c) {
    const double rr = R.squaredNorm();
    c = rr > 0.0 ? (R.adjoint() * L).trace() / rr : cd(0.0);
    const double ln = L.norm();
    return ln > 0.0 ? (L - c * R).norm() / ln : 0.0;
}

// Relative residual of L = c R minimized over cube roots of unity.
double cube_root_fit(const Mat3& L, const Mat3& R, cd& best) {
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 6; k += 2) {
        const double d = (L - eps_pow(k) * R).norm() / std::max(L.norm(), 1e-300);
        if (d < m) {
            m = d;
            best = eps_pow(k);
        }
    }
    return m;
}

}  // namespace

Mat3 apply_candidate(const ClassificationCandidate& c, const Mat3& X) {
    const Mat3 Minv = c.matrix.inverse();
    if (c.family == Family::Conjugation) return c.matrix * X.conjugate() * Minv;
    return -(c.matrix * X.adjoint() * Minv);
}

DefectRecord constraint_defects(const ClassificationCandidate& c) {
    DefectRecord rec;
    const Mat3& M = c.matrix;
    const Mat3 P = sigma_conjugator();
    const Mat3 W = Omega();
    const Mat3 Minv = M.inverse();
    cd k1 = 1.0, k2 = 1.0;
    if (c.family == Family::Conjugation) {
        if (c.relation == Relation::Commuting) {
            rec.entries.emplace_back("omega_relation", cube_root_fit(M, W * M * W, k1));
            rec.entries.emplace_back("sigma_relation", fitted(P * Minv.transpose(), M * P.conjugate(), k2));
        } else {
            rec.entries.emplace_back("sigma_relation", fitted(P * Minv.transpose() * P, M, k1));
            rec.entries.emplace_back("omega_relation", cube_root_fit(W * M * W.conjugate(), M, k2));
        }
        cd g;
        rec.entries.emplace_back("involution", fitted(M * M.conjugate(), Mat3::Identity(), g));
    } else {
        if (c.relation == Relation::Commuting)
            rec.entries.emplace_back("sigma_relation", fitted(P * Minv.transpose(), M * P, k1));
        else
            rec.entries.emplace_back("sigma_relation", fitted(P, M * P.transpose() * M.transpose(), k1));
        cd g;
        rec.entries.emplace_back("involution", fitted(M, M.adjoint(), g));
    }
    rec.phase = k1;

    double inv = 0.0, rel = 0.0;
    for (const Mat3& X : real_basis()) {
        const Mat3 t = apply_candidate(c, X);
        inv = std::max(inv, (apply_candidate(c, t) - X).norm());
        if (c.relation == Relation::Commuting)
            rel = std::max(rel, (sigma_hat(t) - apply_candidate(c, sigma_hat(X))).norm());
        else
            rel = std::max(rel, (sigma_hat(apply_candidate(c, sigma_hat(X))) - t).norm());
    }
    rec.entries.emplace_back("map_involution", inv);
    rec.entries.emplace_back("map_relation", rel);
    return rec;
}

namespace {

// Lexicographic score: entries off {0, 1, -1}, then det != 1, then entries at -1, then row-major (re, im).
bool better(const Mat3& a, const Mat3& b) {
    auto key = [](const Mat3& m) {
        int off = 0, neg = 0;
        const int det = std::abs(m.determinant() - 1.0) < 1e-9 ? 0 : 1;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const cd x = m(i, j);
                if (std::abs(x) < 1e-9) continue;
                if (std::abs(x + 1.0) < 1e-9)
                    ++neg;
                else if (std::abs(x - 1.0) >= 1e-9)
                    ++off;
            }
        return std::make_tuple(off, det, neg);
    };
    const auto ka = key(a), kb = key(b);
    if (ka != kb) return ka < kb;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const cd x = a(i, j), y = b(i, j);
            if (std::abs(x.real() - y.real()) > 1e-9) return x.real() < y.real();
            if (std::abs(x.imag() - y.imag()) > 1e-9) return x.imag() < y.imag();
        }
    return false;
}

Mat3 snap(Mat3 m) {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double re = m(i, j).real(), im = m(i, j).imag();
            if (std::abs(re - std::round(re)) < 1e-11) re = std::round(re);
            if (std::abs(im - std::round(im)) < 1e-11) im = std::round(im);
            m(i, j) = cd(re + 0.0, im + 0.0);
        }
    return m;
}

Mat3 normalize_scalar(const Mat3& m, bool diagonal_family) {
    if (diagonal_family && std::abs(m(2, 2)) > 1e-12) return snap(m / m(2, 2));
    for (int j = 0; j < 3; ++j)
        if (std::abs(m(0, j)) > 1e-12) return snap(m / m(0, j));
    return m;
}

}  // namespace

ClassificationCandidate canonicalize(const ClassificationCandidate& c, bool collapse_magnitudes) {
    const bool conj = c.family == Family::Conjugation;
    const int p[3] = {1, -1, 0};
    // |M'_ij| = r^{p_i + s p_j} |M_ij| with s = -1 (conjugation) or +1 (outer), up to a scalar.
    const int s = conj ? -1 : 1;
    double rho = 0.0;
    if (collapse_magnitudes) {
        // Least squares in (rho, gamma) for log|M_ij| + (p_i + s p_j) rho + gamma = 0.
        double saa = 0.0, sab = 0.0, sbb = 0.0, sa = 0.0, sb = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double a = std::abs(c.matrix(i, j));
                if (a < 1e-12) continue;
                const double e = p[i] + s * p[j], l = std::log(a);
                saa += e * e;
                sab += e;
                sbb += 1.0;
                sa -= e * l;
                sb -= l;
            }
        const double det = saa * sbb - sab * sab;
        if (std::abs(det) > 1e-12) rho = (sa * sbb - sab * sb) / det;
    }
    const double r = std::exp(rho);

    const bool diagonal = c.matrix.isDiagonal(1e-14);
    const bool diagonal_family = !collapse_magnitudes && diagonal;
    ClassificationCandidate best = c;
    bool have = false;
    for (int k = 0; k < 48; ++k) {
        const cd d = std::polar(r, kPi * k / 24.0);
        Mat3 D = Mat3::Identity();
        D(0, 0) = d;
        D(1, 1) = 1.0 / d;
        const Mat3 right = conj ? Mat3(D.conjugate().inverse()) : Mat3(D.conjugate());
        const Mat3 m = normalize_scalar(D * c.matrix * right, diagonal_family);
        if (!have || better(m, best.matrix)) {
            best.matrix = m;
            have = true;
        }
    }
    best.phase = constraint_defects(best).phase;
    return best;
}

bool same_matrix(const Mat3& a, const Mat3& b, double tol) { return (a - b).cwiseAbs().maxCoeff() <= tol; }

std::vector<ClassificationCandidate> classify_involutions(Family family, Relation relation, const SearchConfig& cfg) {
    std::vector<cd> values;
    for (double m : cfg.magnitudes)
        for (int k = 0; k < cfg.phase_root; ++k) values.push_back(std::polar(m, 2.0 * kPi * k / cfg.phase_root));

    std::array<int, 3> perm = {0, 1, 2};
    std::vector<std::array<int, 3>> perms;
    do perms.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));

    const long nv = static_cast<long>(values.size());
    const long total = static_cast<long>(perms.size()) * nv * nv;
    std::vector<unsigned char> hit(static_cast<std::size_t>(total), 0);
    auto candidate = [&](long idx) {
        const auto& pm = perms[static_cast<std::size_t>(idx / (nv * nv))];
        const cd x = values[static_cast<std::size_t>((idx / nv) % nv)];
        const cd y = values[static_cast<std::size_t>(idx % nv)];
        ClassificationCandidate c;
        c.family = family;
        c.relation = relation;
        c.matrix = Mat3::Zero();
        c.matrix(0, pm[0]) = 1.0;
        c.matrix(1, pm[1]) = x;
        c.matrix(2, pm[2]) = y;
        return c;
    };
    auto test = [&](long idx) { hit[static_cast<std::size_t>(idx)] = constraint_defects(candidate(idx)).max() < cfg.tol; };
    if (cfg.exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (long idx = 0; idx < total; ++idx) test(idx);
    } else {
        for (long idx = 0; idx < total; ++idx) test(idx);
    }

    const bool collapse = !(family == Family::Outer && relation == Relation::Commuting);
    std::vector<ClassificationCandidate> out;
    bool any = false;
    for (long idx = 0; idx < total; ++idx) {
        if (!hit[static_cast<std::size_t>(idx)]) continue;
        any = true;
        const ClassificationCandidate c = canonicalize(candidate(idx), collapse);
        const bool dup = std::any_of(out.begin(), out.end(),
                                     [&](const ClassificationCandidate& o) { return same_matrix(o.matrix, c.matrix); });
        if (!dup) out.push_back(c);
    }
    if (!any) throw Error(ErrorKind::EmptySearch, "no candidate satisfies the constraints on this lattice");
    std::sort(out.begin(), out.end(),
              [](const ClassificationCandidate& a, const ClassificationCandidate& b) { return better(a.matrix, b.matrix); });
    return out;
}

ClassificationCandidate candidate_for(const InvolutionSpec& spec) {
    ClassificationCandidate c;
    c.family = spec.transpose ? Family::Outer : Family::Conjugation;
    c.relation = spec.lambda_map == LambdaMap::Conjugate ? Relation::Split : Relation::Commuting;
    c.matrix = spec.conjugator;
    return c;
}

}  // namespace toda
