#include "toda/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace toda {

GeometrySpec make_geometry(Tag tag) {
    GeometrySpec g;
    g.tag = tag;
    g.involution = involution_for(tag);
    const bool asym = tag == Tag::CH21 || tag == Tag::AffIndef;
    g.kind = asym ? CoordKind::Asymptotic : CoordKind::Conformal;
    switch (tag) {
        case Tag::CP2: g.signature = Mat3::Identity(); break;
        case Tag::CH2: g.signature = I21(); break;
        case Tag::CH21: g.signature = P0(); break;
        default:
            g.has_signature = false;
            g.signature = Mat3::Zero();
    }
    if (tag == Tag::AffDefEll) g.H = 1.0;
    if (tag == Tag::AffDefHyp || tag == Tag::AffIndef) g.H = -1.0;
    if (asym) {
        g.lambda_samples = {0.5, 1.0, 2.0};
    } else {
        for (int k = 0; k < 16; ++k) g.lambda_samples.push_back(std::polar(1.0, 2.0 * kPi * k / 16.0));
    }
    return g;
}

Sampler constant_sampler(cd value) {
    return [value](double, double) { return value; };
}

Sampler poly_z_sampler(std::vector<cd> coeffs) {
    return [c = std::move(coeffs)](double a, double b) {
        const cd z(a, b);
        cd acc = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
        return acc;
    };
}

Sampler poly_a_sampler(std::vector<cd> coeffs) {
    return [c = std::move(coeffs)](double a, double) {
        cd acc = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * a + *it;
        return acc;
    };
}

Sampler poly_b_sampler(std::vector<cd> coeffs) {
    return [c = std::move(coeffs)](double, double b) {
        cd acc = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * b + *it;
        return acc;
    };
}

Sampler conj_sampler(Sampler s) {
    return [s = std::move(s)](double a, double b) { return std::conj(s(a, b)); };
}

void check_point_reality(const GeometrySpec& geom, const PointData& p) {
    const double tol = 1e-12;
    auto off = [&](double part, cd v) { return std::abs(part) > tol * std::max(1.0, std::abs(v)); };
    if (geom.tag == Tag::CH21) {
        if (off(p.Q.real(), p.Q) || off(p.R.real(), p.R))
            throw Error(ErrorKind::RealityViolation, "CH21 requires purely imaginary Q and R");
    }
    if (geom.tag == Tag::AffIndef) {
        if (off(p.Q.imag(), p.Q) || off(p.R.imag(), p.R))
            throw Error(ErrorKind::RealityViolation, "AffIndef requires real Q and R");
    }
}

namespace {

GradedAlpha graded_unchecked(const GeometrySpec& geom, const PointData& p) {
    const cd I(0.0, 1.0);
    const double h = std::exp(0.5 * p.omega);
    const cd q = p.Q * std::exp(-p.omega);
    const cd r = p.R * std::exp(-p.omega);
    cd wa, wb;
    if (is_conformal(geom)) {
        wa = 0.5 * cd(p.omega_a, -p.omega_b);
        wb = 0.5 * cd(p.omega_a, p.omega_b);
    } else {
        wa = p.omega_a;
        wb = p.omega_b;
    }

    GradedAlpha g{Mat3::Zero(), Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
    g.U0(0, 0) = 0.5 * wa;
    g.U0(1, 1) = -0.5 * wa;
    g.V0(0, 0) = -0.5 * wb;
    g.V0(1, 1) = 0.5 * wb;

    switch (geom.tag) {
        case Tag::CP2:
            g.Um1(0, 2) = h;
            g.Um1(1, 0) = -q;
            g.Um1(2, 1) = -h;
            g.V1(0, 1) = r;
            g.V1(1, 2) = h;
            g.V1(2, 0) = -h;
            break;
        case Tag::CH2:
            g.Um1(0, 2) = h;
            g.Um1(1, 0) = -q;
            g.Um1(2, 1) = h;
            g.V1(0, 1) = r;
            g.V1(1, 2) = h;
            g.V1(2, 0) = h;
            break;
        case Tag::CH21:
            g.Um1(0, 2) = h;
            g.Um1(1, 0) = -q;
            g.Um1(2, 1) = h;
            g.V1(0, 1) = -r;
            g.V1(1, 2) = h;
            g.V1(2, 0) = h;
            break;
        case Tag::AffDefEll:
            g.Um1(0, 2) = I * h;
            g.Um1(1, 0) = q;
            g.Um1(2, 1) = I * h;
            g.V1(0, 1) = r;
            g.V1(1, 2) = I * h;
            g.V1(2, 0) = I * h;
            break;
        case Tag::AffDefHyp:
        case Tag::AffIndef:
            g.Um1(0, 2) = h;
            g.Um1(1, 0) = q;
            g.Um1(2, 1) = h;
            g.V1(0, 1) = r;
            g.V1(1, 2) = h;
            g.V1(2, 0) = h;
            break;
    }
    return g;
}

LaxPair assemble(const GradedAlpha& g, cd lambda) { return {g.Um1 / lambda + g.U0, g.V0 + lambda * g.V1}; }

}  // namespace

GradedAlpha graded_alpha(const GeometrySpec& geom, const PointData& p) {
    check_point_reality(geom, p);
    return graded_unchecked(geom, p);
}

LaxPair build_alpha(const GeometrySpec& geom, const PointData& p, cd lambda) {
    if (lambda == cd(0.0)) throw Error(ErrorKind::ZeroLambda, "build_alpha at lambda = 0");
    return assemble(graded_alpha(geom, p), lambda);
}

double tzitzeica_lhs(Tag tag, double omega, double omega_ab, cd Q, cd R) {
    const double e1 = std::exp(omega);
    const double e2 = std::exp(-2.0 * omega);
    switch (tag) {
        case Tag::CP2: return omega_ab + e1 - std::norm(Q) * e2;
        case Tag::CH2: return omega_ab - e1 - std::norm(Q) * e2;
        case Tag::AffDefEll: return omega_ab + e1 + std::norm(Q) * e2;
        case Tag::AffDefHyp: return omega_ab - e1 + std::norm(Q) * e2;
        case Tag::CH21:
        case Tag::AffIndef: return omega_ab - e1 + (Q * R).real() * e2;
    }
    return 0.0;
}

namespace {

double d1(const double* f, std::ptrdiff_t stride, int k, int n, double h) {
    if (k == 0) return (-3.0 * f[0] + 4.0 * f[stride] - f[2 * stride]) / (2.0 * h);
    if (k == n - 1) {
        const double* e = f + (n - 1) * stride;
        return (3.0 * e[0] - 4.0 * e[-stride] + e[-2 * stride]) / (2.0 * h);
    }
    const double* c = f + k * stride;
    return (c[stride] - c[-stride]) / (2.0 * h);
}

double d2(const double* f, std::ptrdiff_t stride, int k, int n, double h) {
    const double h2 = h * h;
    if (k > 0 && k < n - 1) {
        const double* c = f + k * stride;
        return (c[stride] - 2.0 * c[0] + c[-stride]) / h2;
    }
    if (n < 4) {
        const double* c = f + (k == 0 ? 0 : (n - 3)) * stride;
        return (c[0] - 2.0 * c[stride] + c[2 * stride]) / h2;
    }
    if (k == 0) return (2.0 * f[0] - 5.0 * f[stride] + 4.0 * f[2 * stride] - f[3 * stride]) / h2;
    const double* e = f + (n - 1) * stride;
    return (2.0 * e[0] - 5.0 * e[-stride] + 4.0 * e[-2 * stride] - e[-3 * stride]) / h2;
}

void require_grid(const Grid& g) {
    if (g.na < 3 || g.nb < 3) throw Error(ErrorKind::GridTooSmall, "need at least 3 points per side");
}

}  // namespace

ScalarField diff_a(const ScalarField& f) {
    require_grid(f.grid);
    const Grid& g = f.grid;
    ScalarField out(g);
    for (int i = 0; i < g.na; ++i)
        for (int j = 0; j < g.nb; ++j) out(i, j) = d1(&f.values[g.index(0, j)], g.nb, i, g.na, g.ha);
    return out;
}

ScalarField diff_b(const ScalarField& f) {
    require_grid(f.grid);
    const Grid& g = f.grid;
    ScalarField out(g);
    for (int i = 0; i < g.na; ++i)
        for (int j = 0; j < g.nb; ++j) out(i, j) = d1(&f.values[g.index(i, 0)], 1, j, g.nb, g.hb);
    return out;
}

ScalarField tzitzeica_residual(const GeometrySpec& geom, const ScalarField& omega, const Sampler& Q,
                               const Sampler& R, Exec exec) {
    require_grid(omega.grid);
    const Grid& g = omega.grid;
    ScalarField out(g);
    const bool conformal = is_conformal(geom);
    ScalarField wb;
    if (!conformal) wb = diff_b(omega);
    const double* w = omega.values.data();

    auto point = [&](int i, int j) {
        double mixed;
        if (conformal) {
            const double wxx = d2(w + g.index(0, j), g.nb, i, g.na, g.ha);
            const double wyy = d2(w + g.index(i, 0), 1, j, g.nb, g.hb);
            mixed = 0.25 * (wxx + wyy);
        } else {
            mixed = d1(&wb.values[g.index(0, j)], g.nb, i, g.na, g.ha);
        }
        const double a = g.a(i), b = g.b(j);
        out(i, j) = tzitzeica_lhs(geom.tag, omega(i, j), mixed, Q(a, b), R(a, b));
    };

    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < g.na; ++i)
            for (int j = 0; j < g.nb; ++j) point(i, j);
    } else {
        for (int i = 0; i < g.na; ++i)
            for (int j = 0; j < g.nb; ++j) point(i, j);
    }
    return out;
}

SymmetryDefects symmetry_defects(const GeometrySpec& geom, const PointData& p) {
    const GradedAlpha g = graded_unchecked(geom, p);
    SymmetryDefects d;
    d.twist = std::max({(g.Um1 - eig_project(g.Um1, -1)).norm(), (g.U0 - eig_project(g.U0, 0)).norm(),
                        (g.V1 - eig_project(g.V1, 1)).norm(), (g.V0 - eig_project(g.V0, 0)).norm()});
    const InvolutionSpec& s = geom.involution;
    for (cd lam : geom.lambda_samples) {
        const LaxPair a = assemble(g, lam);
        if (is_conformal(geom)) {
            d.reality = std::max({d.reality, (tau_hat(s, a.V) - a.U).norm(), (tau_hat(s, a.U) - a.V).norm()});
        } else {
            d.reality = std::max({d.reality, (tau_hat(s, a.U) - a.U).norm(), (tau_hat(s, a.V) - a.V).norm()});
        }
    }
    return d;
}

PointData random_point_data(Tag tag, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PointData p;
    p.omega = u(rng);
    p.omega_a = u(rng);
    p.omega_b = u(rng);
    const cd q(u(rng), u(rng));
    switch (tag) {
        case Tag::CH21:
            p.Q = cd(0.0, u(rng));
            p.R = cd(0.0, u(rng));
            break;
        case Tag::AffIndef:
            p.Q = u(rng);
            p.R = u(rng);
            break;
        default:
            p.Q = q;
            p.R = std::conj(q);
    }
    return p;
}

double flatness_defect(const GeometrySpec& geom, const ScalarField& omega, const Sampler& Q,
                       const Sampler& R, cd lambda) {
    const Grid& g = omega.grid;
    if (g.na < 5 || g.nb < 5) throw Error(ErrorKind::GridTooSmall, "flatness needs at least 5 points per side");
    const ScalarField wa = diff_a(omega);
    const ScalarField wb = diff_b(omega);
    Field<Mat3> U(g), V(g);
    for (int i = 0; i < g.na; ++i) {
        for (int j = 0; j < g.nb; ++j) {
            PointData p{omega(i, j), wa(i, j), wb(i, j), Q(g.a(i), g.b(j)), R(g.a(i), g.b(j))};
            const LaxPair ab = build_alpha(geom, p, lambda);
            U(i, j) = ab.U;
            V(i, j) = ab.V;
        }
    }
    auto da = [&](const Field<Mat3>& F, int i, int j) -> Mat3 { return (F(i + 1, j) - F(i - 1, j)) / (2.0 * g.ha); };
    auto db = [&](const Field<Mat3>& F, int i, int j) -> Mat3 { return (F(i, j + 1) - F(i, j - 1)) / (2.0 * g.hb); };
    const cd I(0.0, 1.0);
    double worst = 0.0;
    for (int i = 2; i < g.na - 2; ++i) {
        for (int j = 2; j < g.nb - 2; ++j) {
            Mat3 dV, dU;
            if (is_conformal(geom)) {
                dV = 0.5 * (da(V, i, j) - I * db(V, i, j));  // d_z V
                dU = 0.5 * (da(U, i, j) + I * db(U, i, j));  // d_zbar U
            } else {
                dV = da(V, i, j);
                dU = db(U, i, j);
            }
            const Mat3 c = dV - dU + U(i, j) * V(i, j) - V(i, j) * U(i, j);
            worst = std::max(worst, c.norm());
        }
    }
    return worst;
}

}  // namespace toda
