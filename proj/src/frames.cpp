#include "toda/frames.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace toda {

namespace {

// Fornberg's recursion: weights of the m-th derivative at x0 over the nodes x.
std::vector<double> fd_weights(double x0, const std::vector<double>& x, int m) {
    const int n = static_cast<int>(x.size());
    std::vector<std::vector<double>> c(static_cast<std::size_t>(m + 1), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    double c1 = 1.0, c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[static_cast<std::size_t>(i)] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c[static_cast<std::size_t>(m)];
}

// Weights on a window of grid nodes, clamped at the ends of the line.
struct LineStencil {
    int start;
    std::vector<double> w;
};

LineStencil window(int n, int width, double pos, int m) {
    const int w = std::min(width, n);
    int start = static_cast<int>(std::floor(pos)) - (w - 1) / 2;
    start = std::clamp(start, 0, n - w);
    std::vector<double> nodes(static_cast<std::size_t>(w));
    for (int k = 0; k < w; ++k) nodes[static_cast<std::size_t>(k)] = start + k;
    return {start, fd_weights(pos, nodes, m)};
}

struct LocalData {
    double w, wa, wb;
};

Mat3 cbrt_normalize(const Mat3& F, double& drift) {
    const cd d = F.determinant();
    drift = std::abs(d - 1.0);
    return F / std::pow(d, 1.0 / 3.0);
}

class FrameIntegrator {
public:
    FrameIntegrator(const GeometrySpec& geom, const ScalarField& omega, const Sampler& Q, const Sampler& R, cd lambda)
        : geom_(geom), omega_(omega), Q_(Q), R_(R), lambda_(lambda), g_(omega.grid) {
        wa_ = derivative(true);
        wb_ = derivative(false);
    }

    // Generator along a (dir_a) or b at fractional index position.
    Mat3 generator(bool dir_a, double pi, double pj) const {
        const LocalData d = interpolate(pi, pj);
        PointData p;
        p.omega = d.w;
        p.omega_a = d.wa;
        p.omega_b = d.wb;
        const double a = g_.a0 + g_.ha * pi, b = g_.b0 + g_.hb * pj;
        p.Q = Q_(a, b);
        p.R = R_(a, b);
        const LaxPair lp = build_alpha(geom_, p, lambda_);
        if (!is_conformal(geom_)) return dir_a ? lp.U : lp.V;
        // alpha = U dz + V dzbar with z = a + i b.
        return dir_a ? Mat3(lp.U + lp.V) : Mat3(cd(0.0, 1.0) * (lp.U - lp.V));
    }

    Mat3 step(const Mat3& F, bool dir_a, int i, int j, double& drift) const {
        const double h = dir_a ? g_.ha : g_.hb;
        const Mat3 A0 = generator(dir_a, i, j);
        const Mat3 Am = dir_a ? generator(true, i + 0.5, j) : generator(false, i, j + 0.5);
        const Mat3 A1 = dir_a ? generator(true, i + 1, j) : generator(false, i, j + 1);
        const Mat3 k1 = F * A0;
        const Mat3 k2 = (F + 0.5 * h * k1) * Am;
        const Mat3 k3 = (F + 0.5 * h * k2) * Am;
        const Mat3 k4 = (F + h * k3) * A1;
        const Mat3 next = F + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        return cbrt_normalize(next, drift);
    }

    // a_first: march along the b0 line in a, then every column in b.
    Field<Mat3> run(const Mat3& base, bool a_first, Exec exec, double& max_drift) const {
        Field<Mat3> out(g_, Mat3::Zero());
        out(0, 0) = base;
        const int outer = a_first ? g_.na : g_.nb;
        const int inner = a_first ? g_.nb : g_.na;
        double drift = 0.0;
        max_drift = 0.0;
        for (int k = 0; k + 1 < outer; ++k) {
            if (a_first)
                out(k + 1, 0) = step(out(k, 0), true, k, 0, drift);
            else
                out(0, k + 1) = step(out(0, k), false, 0, k, drift);
            max_drift = std::max(max_drift, drift);
        }
        std::vector<double> drifts(static_cast<std::size_t>(outer), 0.0);
        auto column = [&](int k) {
            double dmax = 0.0, d = 0.0;
            for (int m = 0; m + 1 < inner; ++m) {
                if (a_first)
                    out(k, m + 1) = step(out(k, m), false, k, m, d);
                else
                    out(m + 1, k) = step(out(m, k), true, m, k, d);
                dmax = std::max(dmax, d);
            }
            drifts[static_cast<std::size_t>(k)] = dmax;
        };
        if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
            for (int k = 0; k < outer; ++k) column(k);
        } else {
            for (int k = 0; k < outer; ++k) column(k);
        }
        for (double d : drifts) max_drift = std::max(max_drift, d);
        return out;
    }

private:
    std::vector<double> derivative(bool dir_a) const {
        std::vector<double> out(g_.size());
        const int n = dir_a ? g_.na : g_.nb;
        const double h = dir_a ? g_.ha : g_.hb;
        for (int i = 0; i < g_.na; ++i)
            for (int j = 0; j < g_.nb; ++j) {
                const int c = dir_a ? i : j;
                const LineStencil s = window(n, 5, c, 1);
                double acc = 0.0;
                for (std::size_t k = 0; k < s.w.size(); ++k) {
                    const int m = s.start + static_cast<int>(k);
                    acc += s.w[k] * (dir_a ? omega_(m, j) : omega_(i, m));
                }
                out[g_.index(i, j)] = acc / h;
            }
        return out;
    }

    // Cubic Lagrange interpolation; one of pi, pj is an integer.
    LocalData interpolate(double pi, double pj) const {
        const bool frac_a = pi != std::floor(pi);
        const bool frac_b = pj != std::floor(pj);
        if (!frac_a && !frac_b) {
            const int i = static_cast<int>(pi), j = static_cast<int>(pj);
            const std::size_t k = g_.index(i, j);
            return {omega_(i, j), wa_[k], wb_[k]};
        }
        LocalData d{0.0, 0.0, 0.0};
        if (frac_a) {
            const int j = static_cast<int>(pj);
            const LineStencil s = window(g_.na, 4, pi, 0);
            for (std::size_t k = 0; k < s.w.size(); ++k) {
                const int m = s.start + static_cast<int>(k);
                const std::size_t idx = g_.index(m, j);
                d.w += s.w[k] * omega_(m, j);
                d.wa += s.w[k] * wa_[idx];
                d.wb += s.w[k] * wb_[idx];
            }
        } else {
            const int i = static_cast<int>(pi);
            const LineStencil s = window(g_.nb, 4, pj, 0);
            for (std::size_t k = 0; k < s.w.size(); ++k) {
                const int m = s.start + static_cast<int>(k);
                const std::size_t idx = g_.index(i, m);
                d.w += s.w[k] * omega_(i, m);
                d.wa += s.w[k] * wa_[idx];
                d.wb += s.w[k] * wb_[idx];
            }
        }
        return d;
    }

    const GeometrySpec& geom_;
    const ScalarField& omega_;
    const Sampler& Q_;
    const Sampler& R_;
    cd lambda_;
    Grid g_;
    std::vector<double> wa_, wb_;
};

}  // namespace

FrameField integrate_frame(const GeometrySpec& geom, const ScalarField& omega, const Sampler& Q, const Sampler& R,
                           cd lambda, const Mat3& base, const FrameOptions& opts) {
    if (lambda == cd(0.0)) throw Error(ErrorKind::ZeroLambda, "lambda must be nonzero");
    const Grid& g = omega.grid;
    if (g.na < 3 || g.nb < 3) throw Error(ErrorKind::GridTooSmall, "need at least 3 points per side");
    if (opts.check_residual) {
        const ScalarField res = tzitzeica_residual(geom, omega, Q, R, opts.exec);
        double worst = 0.0;
        for (int i = 1; i < g.na - 1; ++i)
            for (int j = 1; j < g.nb - 1; ++j) worst = std::max(worst, std::abs(res(i, j)));
        if (worst > opts.residual_threshold)
            throw Error(ErrorKind::ResidualTooLarge, "Tzitzeica residual " + std::to_string(worst) + " above threshold");
    }

    const FrameIntegrator integ(geom, omega, Q, R, lambda);
    FrameField F;
    F.lambda = lambda;
    F.base_value = base;
    F.frames = integ.run(base, true, opts.exec, F.det_drift);
    if (opts.path_check) {
        double drift2 = 0.0;
        const Field<Mat3> other = integ.run(base, false, opts.exec, drift2);
        F.det_drift = std::max(F.det_drift, drift2);
        for (std::size_t k = 0; k < g.size(); ++k)
            F.path_defect = std::max(F.path_defect, (F.frames.values[k] - other.values[k]).norm());
    }
    if (F.det_drift > 1e-6)
        throw Error(ErrorKind::NonUnitDeterminant, "determinant drift " + std::to_string(F.det_drift));
    return F;
}

Mat3 real_conjugator(Tag tag) {
    if (tag != Tag::AffDefEll && tag != Tag::AffDefHyp)
        throw Error(ErrorKind::ConfigError, "geometry: real frame conjugation needs a definite affine tag");
    const double s = 1.0 / std::sqrt(2.0);
    const cd I(0.0, 1.0);
    Mat3 T = Mat3::Zero();
    T(0, 0) = s;
    T(0, 1) = s;
    T(1, 0) = I * s;
    T(1, 1) = -I * s;
    T(2, 2) = tag == Tag::AffDefEll ? I : cd(1.0);
    return T;
}

double imaginary_residue(const FrameField& F) {
    double worst = 0.0;
    for (const Mat3& m : F.frames.values) worst = std::max(worst, m.imag().cwiseAbs().maxCoeff());
    return worst;
}

FrameField real_frame_conjugate(const GeometrySpec& geom, const FrameField& F) {
    const Mat3 T = real_conjugator(geom.tag);
    const Mat3 Ti = T.inverse();
    FrameField out = F;
    for (Mat3& m : out.frames.values) m = T * m * Ti;
    out.base_value = T * F.base_value * Ti;
    const double res = imaginary_residue(out);
    if (res > 1e-8) throw Error(ErrorKind::ImaginaryResidue, "imaginary residue " + std::to_string(res));
    return out;
}

SurfaceMesh extract_surface(const GeometrySpec& geom, const FrameField& F) {
    SurfaceMesh mesh;
    mesh.tag = geom.tag;
    mesh.lambda = F.lambda;
    mesh.samples = Field<Vec3>(F.frames.grid, Vec3::Zero());
    const bool definite = geom.tag == Tag::AffDefEll || geom.tag == Tag::AffDefHyp;
    const Mat3 T = definite ? real_conjugator(geom.tag) : Mat3::Identity();
    mesh.representation = is_affine(geom.tag) ? Representation::R3Point : Representation::HomogeneousLift;
    for (std::size_t k = 0; k < F.frames.values.size(); ++k) {
        Vec3 f = F.frames.values[k].col(2);
        if (definite) f = T * f / T(2, 2);
        if (geom.has_signature) {
            const double n = std::abs((f.transpose() * geom.signature * f.conjugate()).value());
            if (n > 0.0) f /= std::sqrt(n);
        }
        mesh.samples.values[k] = f;
    }
    return mesh;
}

bool ValidationReport::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.pass; });
}

double ValidationReport::defect(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return c.defect;
    throw std::out_of_range("no validation check named " + name);
}

namespace {

constexpr int kHalf = 5;

struct Stencils {
    std::vector<double> w[4];  // derivative orders 0..3 on 11 nodes
};

const Stencils& central_stencils() {
    static const Stencils s = [] {
        Stencils t;
        std::vector<double> nodes;
        for (int k = -kHalf; k <= kHalf; ++k) nodes.push_back(k);
        for (int m = 0; m < 4; ++m) t.w[m] = fd_weights(0.0, nodes, m);
        return t;
    }();
    return s;
}

Vec3 mixed(const Field<Vec3>& f, int i, int j, int p, int q, double ha, double hb) {
    const Stencils& s = central_stencils();
    Vec3 acc = Vec3::Zero();
    for (int k = -kHalf; k <= kHalf; ++k) {
        const double wk = s.w[p][static_cast<std::size_t>(k + kHalf)];
        if (wk == 0.0) continue;
        for (int l = -kHalf; l <= kHalf; ++l) {
            const double wl = s.w[q][static_cast<std::size_t>(l + kHalf)];
            if (wl == 0.0) continue;
            acc += (wk * wl) * f(i + k, j + l);
        }
    }
    return acc / (std::pow(ha, p) * std::pow(hb, q));
}

cd det3(const Vec3& a, const Vec3& b, const Vec3& c) {
    Mat3 m;
    m << a, b, c;
    return m.determinant();
}

}  // namespace

ValidationReport validate_surface(const GeometrySpec& geom, const SurfaceMesh& mesh, const ScalarField& omega,
                                  const ValidationOptions& opts) {
    const Grid& g = mesh.samples.grid;
    if (omega.grid.na != g.na || omega.grid.nb != g.nb)
        throw Error(ErrorKind::GridTooSmall, "mesh and omega grids differ");
    ValidationReport rep;
    rep.cubic = Field<cd>(g, 0.0);
    rep.cubic_r = Field<cd>(g, 0.0);

    const cd lam = mesh.lambda;
    const cd I(0.0, 1.0);
    const bool conformal = is_conformal(geom);
    const bool affine = is_affine(geom.tag);
    const cd kappa = (geom.tag == Tag::AffDefEll || geom.tag == Tag::AffDefHyp)
                         ? real_conjugator(geom.tag).determinant() / std::pow(real_conjugator(geom.tag)(2, 2), 3)
                         : cd(1.0);
    auto pair = [&](const Vec3& x, const Vec3& y) -> cd { return (x.transpose() * geom.signature * y.conjugate())(0, 0); };

    const char* names_affine[] = {"volume", "normal", "cubic_q", "cubic_r"};
    const char* names_lag[] = {"metric", "conformality", "horizontality", "norm", "cubic_q"};
    const std::vector<std::string> names = affine ? std::vector<std::string>(names_affine, names_affine + 4)
                                                  : std::vector<std::string>(names_lag, names_lag + 5);
    const int nchk = static_cast<int>(names.size());

    const int rows = g.na;
    std::vector<std::vector<double>> worst(static_cast<std::size_t>(rows), std::vector<double>(static_cast<std::size_t>(nchk), 0.0));
    std::vector<int> counted(static_cast<std::size_t>(rows), 0);
    std::vector<bool> have_q(static_cast<std::size_t>(rows), false), have_r(static_cast<std::size_t>(rows), false);

    auto masked = [&](int i, int j) {
        if (!opts.mask) return false;
        for (int k = -kHalf; k <= kHalf; ++k)
            for (int l = -kHalf; l <= kHalf; ++l)
                if ((*opts.mask)(i + k, j + l)) return true;
        return false;
    };

#pragma omp parallel for schedule(dynamic)
    for (int i = kHalf; i < g.na - kHalf; ++i) {
        auto& w = worst[static_cast<std::size_t>(i)];
        for (int j = kHalf; j < g.nb - kHalf; ++j) {
            if (masked(i, j)) continue;
            ++counted[static_cast<std::size_t>(i)];
            const Field<Vec3>& F = mesh.samples;
            auto D = [&](int p, int q) { return mixed(F, i, j, p, q, g.ha, g.hb); };
            const Vec3 f = F(i, j);
            const double ew = std::exp(omega(i, j));
            const double a = g.a(i), b = g.b(j);
            std::vector<double> d(static_cast<std::size_t>(nchk), 0.0);
            if (conformal) {
                const Vec3 fx = D(1, 0), fy = D(0, 1);
                const Vec3 fxx = D(2, 0), fxy = D(1, 1), fyy = D(0, 2);
                const Vec3 fxxx = D(3, 0), fxxy = D(2, 1), fxyy = D(1, 2), fyyy = D(0, 3);
                const Vec3 fz = 0.5 * (fx - I * fy);
                const Vec3 fzb = 0.5 * (fx + I * fy);
                const Vec3 fzzb = 0.25 * (fxx + fyy);
                const Vec3 fzz = 0.25 * (fxx - 2.0 * I * fxy - fyy);
                const Vec3 fzzz = 0.125 * (fxxx - 3.0 * I * fxxy - 3.0 * fxyy + I * fyyy);
                if (affine) {
                    d[0] = std::abs(det3(fz, fzb, fzzb) / kappa - ew * ew);
                    d[1] = (fzzb + geom.H * ew * f).norm();
                    const cd q2 = det3(fz, fzz, fzzz) * std::pow(lam, 6) / kappa;
                    rep.cubic(i, j) = q2;
                    if (opts.Q) {
                        d[2] = std::abs(q2 - std::pow((*opts.Q)(a, b), 2));
                        have_q[static_cast<std::size_t>(i)] = true;
                    }
                } else {
                    const double sgn = geom.tag == Tag::CP2 ? 1.0 : -1.0;
                    d[0] = std::max(std::abs(pair(fz, fz) - ew), std::abs(pair(fzb, fzb) - ew));
                    d[1] = std::abs(pair(fz, fzb));
                    d[2] = std::max(std::abs(pair(fx, f)), std::abs(pair(fy, f)));
                    d[3] = std::abs(pair(f, f) - sgn);
                    const cd q = std::pow(lam, 3) * pair(fzzz, f);
                    rep.cubic(i, j) = q;
                    if (opts.Q) {
                        d[4] = std::abs(q - (*opts.Q)(a, b));
                        have_q[static_cast<std::size_t>(i)] = true;
                    }
                }
            } else {
                const Vec3 fu = D(1, 0), fv = D(0, 1), fuv = D(1, 1);
                const Vec3 fuu = D(2, 0), fvv = D(0, 2), fuuu = D(3, 0), fvvv = D(0, 3);
                if (affine) {
                    d[0] = std::abs(det3(fu, fv, fuv) - ew * ew);
                    d[1] = (fuv + geom.H * ew * f).norm();
                    const cd q2 = det3(fu, fuu, fuuu) * std::pow(lam, 6);
                    const cd mr2 = det3(fv, fvv, fvvv) * std::pow(lam, -6);
                    rep.cubic(i, j) = q2;
                    rep.cubic_r(i, j) = mr2;
                    if (opts.Q) {
                        d[2] = std::abs(q2 - std::pow((*opts.Q)(a, b), 2));
                        have_q[static_cast<std::size_t>(i)] = true;
                    }
                    if (opts.R) {
                        d[3] = std::abs(mr2 + std::pow((*opts.R)(a, b), 2));
                        have_r[static_cast<std::size_t>(i)] = true;
                    }
                } else {
                    d[0] = std::abs(pair(fu, fv) - ew);
                    d[1] = std::max(std::abs(pair(fu, fu)), std::abs(pair(fv, fv)));
                    d[2] = std::max(std::abs(pair(fu, f)), std::abs(pair(fv, f)));
                    d[3] = std::abs(pair(f, f) + 1.0);
                    const cd q = std::pow(lam, 3) * pair(fuuu, f);
                    rep.cubic(i, j) = q;
                    if (opts.Q) {
                        d[4] = std::abs(q - (*opts.Q)(a, b));
                        have_q[static_cast<std::size_t>(i)] = true;
                    }
                }
            }
            for (int c = 0; c < nchk; ++c)
                w[static_cast<std::size_t>(c)] = std::max(w[static_cast<std::size_t>(c)], d[static_cast<std::size_t>(c)]);
        }
    }

    const bool any_q = std::any_of(have_q.begin(), have_q.end(), [](bool v) { return v; });
    const bool any_r = std::any_of(have_r.begin(), have_r.end(), [](bool v) { return v; });
    for (int c = 0; c < nchk; ++c) {
        const std::string& name = names[static_cast<std::size_t>(c)];
        if (name == "cubic_q" && !any_q) continue;
        if (name == "cubic_r" && !any_r) continue;
        ValidationCheck chk;
        chk.name = name;
        chk.tol = opts.tol;
        for (int i = 0; i < rows; ++i) chk.defect = std::max(chk.defect, worst[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)]);
        chk.pass = chk.defect < opts.tol;
        rep.checks.push_back(chk);
    }
    for (int v : counted) rep.points += v;
    return rep;
}

}  // namespace toda
