#include "toda/factorization.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace toda {

namespace {

std::vector<cd> circle(int m) {
    std::vector<cd> pts;
    pts.reserve(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) pts.push_back(std::polar(1.0, 2.0 * kPi * (k + 0.5) / m));
    return pts;
}

LaurentLoop plus_part(const LaurentLoop& L) {
    LaurentLoop out(L.N(), L.twisted());
    for (int k = 0; k <= L.N(); ++k) out.at(k) = L[k];
    return out;
}

}  // namespace

LoopFactorPair birkhoff_split(const LaurentLoop& L, const SplitOptions& opts) {
    const int K = L.N();
    LoopFactorPair out;
    out.other = LaurentLoop::identity(K);
    out.other.set_twisted(L.twisted());
    if (L.min_degree() >= 0) {
        out.plus = L;
        out.condition = 1.0;
        return out;
    }

    Eigen::MatrixXcd T(3 * K, 3 * K);
    Eigen::MatrixXcd rhs(3 * K, 3);
    for (int r = 0; r < K; ++r) {
        for (int c = 0; c < K; ++c) T.block<3, 3>(3 * r, 3 * c) = L[c - r];
        rhs.block<3, 3>(3 * r, 0) = -L[-(r + 1)];
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(T, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    out.condition = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    if (!(out.condition <= opts.cond_limit))
        throw Error(ErrorKind::SingularCell, "Toeplitz condition number " + std::to_string(out.condition));
    const Eigen::MatrixXcd m = svd.solve(rhs);
    for (int k = 1; k <= K; ++k) out.other.at(-k) = m.block<3, 3>(3 * (k - 1), 0);

    out.plus = plus_part(loop_mul(L, out.other));
    out.plus.set_twisted(L.twisted());

    for (cd lam : circle(opts.circle_samples)) {
        const Mat3 rec = loop_eval(out.plus, lam) * loop_eval(out.other, lam).inverse();
        out.residual = std::max(out.residual, (loop_eval(L, lam) - rec).norm());
    }
    if (!(out.residual <= opts.tol))
        throw Error(ErrorKind::NoConvergence, "Birkhoff reassembly residual " + std::to_string(out.residual));
    return out;
}

LoopFactorPair iwasawa_split(const LaurentLoop& L, const InvolutionSpec& spec, const SplitOptions& opts) {
    if (spec.lambda_map != LambdaMap::InverseConjugate)
        throw Error(ErrorKind::ConfigError, "geometry: Iwasawa splitting needs a circle-preserving involution");
    const LaurentLoop X = loop_mul(loop_inverse(L), apply_involution_group(spec, L));
    LoopFactorPair b;
    try {
        b = birkhoff_split(X, opts);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::NoConvergence)
            throw Error(ErrorKind::NoConvergence, std::string("Iwasawa: ") + e.what());
        throw;
    }
    const Mat3 a0 = b.plus[0];
    const cd alpha = a0(0, 0);
    Mat3 expect = Mat3::Identity();
    expect(0, 0) = alpha;
    expect(1, 1) = 1.0 / alpha;
    const double off = (a0 - expect).norm();
    if (off > 1e-8 || std::abs(alpha.imag()) > 1e-8 * std::abs(alpha) || alpha.real() <= 0.0)
        throw Error(ErrorKind::SingularCell, "Iwasawa: loop outside the big cell");

    const double s = std::sqrt(alpha.real());
    Mat3 D = Mat3::Identity(), Dinv = Mat3::Identity();
    D(0, 0) = s;
    D(1, 1) = 1.0 / s;
    Dinv(0, 0) = 1.0 / s;
    Dinv(1, 1) = s;

    LoopFactorPair out;
    out.condition = b.condition;
    out.other = loop_mul_const(loop_mul(L, b.plus), Dinv);
    out.plus = const_mul_loop(D, loop_inverse(b.plus));
    out.other.set_twisted(L.twisted());
    out.plus.set_twisted(L.twisted());

    for (cd lam : circle(opts.circle_samples)) {
        const Mat3 F = loop_eval(out.other, lam);
        out.residual = std::max(out.residual, (loop_eval(L, lam) - F * loop_eval(out.plus, lam)).norm());
        out.reality = std::max(out.reality, (tau_hat_group(spec, F) - F).norm());
    }
    if (!(out.residual <= opts.tol) || !(out.reality <= opts.reality_tol))
        throw Error(ErrorKind::NoConvergence, "Iwasawa reassembly residual " + std::to_string(out.residual) +
                                                  ", reality " + std::to_string(out.reality));
    return out;
}

LaurentLoop Potential::at(cd z, int N) const {
    LaurentLoop out(N, true);
    for (const auto& [deg, f] : coeffs)
        if (deg >= -N && deg <= N) out.at(deg) = f(z);
    return out;
}

void check_potential(const Potential& eta, const std::vector<cd>& samples, int lowest) {
    if (eta.coeffs.empty() || eta.coeffs.begin()->first != lowest)
        throw Error(ErrorKind::ConfigError, "potential: lowest degree must be " + std::to_string(lowest));
    for (const auto& [deg, f] : eta.coeffs)
        for (cd z : samples) {
            const Mat3 c = f(z);
            if ((c - eig_project(c, mod6(deg))).norm() > 1e-12 * std::max(1.0, c.norm()))
                throw Error(ErrorKind::ConfigError, "potential: degree " + std::to_string(deg) +
                                                        " coefficient leaves its eigenspace");
        }
}

void check_potential_pair(const PotentialPair& pair, const InvolutionSpec& spec, const std::vector<double>& u,
                          const std::vector<double>& v) {
    std::vector<cd> us(u.begin(), u.end()), vs(v.begin(), v.end());
    check_potential(pair.eta1, us, -1);
    if (pair.eta2.coeffs.empty() || pair.eta2.coeffs.rbegin()->first != 1)
        throw Error(ErrorKind::ConfigError, "potential: highest degree of the dv part must be 1");
    for (const auto& [deg, f] : pair.eta2.coeffs)
        for (cd z : vs) {
            const Mat3 c = f(z);
            if ((c - eig_project(c, mod6(deg))).norm() > 1e-12 * std::max(1.0, c.norm()))
                throw Error(ErrorKind::ConfigError, "potential: degree " + std::to_string(deg) +
                                                        " coefficient leaves its eigenspace");
        }
    auto fixed = [&](const Potential& p, const std::vector<cd>& pts) {
        for (const auto& [deg, f] : p.coeffs)
            for (cd z : pts) {
                const Mat3 c = f(z);
                if ((tau_hat(spec, c) - c).norm() > 1e-12 * std::max(1.0, c.norm()))
                    throw Error(ErrorKind::RealityViolation,
                                "potential: degree " + std::to_string(deg) + " coefficient is not tau-fixed");
            }
    };
    fixed(pair.eta1, us);
    fixed(pair.eta2, vs);
}

std::vector<LaurentLoop> integrate_potential(const Potential& eta, const std::vector<cd>& path,
                                             const LaurentLoop& base, int substeps) {
    const int N = base.N();
    std::vector<LaurentLoop> out;
    out.reserve(path.size());
    if (path.empty()) return out;
    out.push_back(base);
    LaurentLoop C = base;
    double tail = base.tail();
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const cd z0 = path[k];
        const cd dz = (path[k + 1] - z0) / static_cast<double>(substeps);
        for (int s = 0; s < substeps; ++s) {
            const cd za = z0 + static_cast<double>(s) * dz;
            C.set_tail(0.0);
            const LaurentLoop e0 = loop_scale(eta.at(za, N), dz);
            const LaurentLoop em = loop_scale(eta.at(za + 0.5 * dz, N), dz);
            const LaurentLoop e1 = loop_scale(eta.at(za + dz, N), dz);
            const LaurentLoop k1 = loop_mul(C, e0);
            const LaurentLoop k2 = loop_mul(loop_add(C, loop_scale(k1, 0.5)), em);
            const LaurentLoop k3 = loop_mul(loop_add(C, loop_scale(k2, 0.5)), em);
            const LaurentLoop k4 = loop_mul(loop_add(C, k3), e1);
            LaurentLoop incr = loop_add(loop_add(k1, k4), loop_scale(loop_add(k2, k3), 2.0));
            C = loop_add(C, loop_scale(incr, 1.0 / 6.0));
            tail += C.tail();
        }
        C.set_twisted(base.twisted());
        C.set_tail(tail);
        out.push_back(C);
    }
    return out;
}

namespace {

struct PointSplit {
    LaurentLoop F;      // real-form factor or W
    Mat3 plus0;         // V_+(0) or L_+(0)
    double residual = 0.0;
    double reality = 0.0;
    double matching = 0.0;
    bool ok = false;
    bool retried = false;
};

void fill_frames(DpwResult& res, const Grid& grid, const std::vector<PointSplit>& pts, const DpwOptions& opts,
                 const Mat3& gauge) {
    for (cd lam : opts.lambdas) {
        FrameField F;
        F.lambda = lam;
        F.frames = Field<Mat3>(grid, Mat3::Identity());
        for (std::size_t k = 0; k < pts.size(); ++k)
            if (pts[k].ok) F.frames.values[k] = loop_eval(pts[k].F, lam) * gauge;
        F.base_value = F.frames.values[0];
        res.frames.push_back(std::move(F));
    }
}

template <typename Fn>
void for_points(std::size_t n, Exec exec, Fn&& fn) {
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long k = 0; k < static_cast<long>(n); ++k) fn(static_cast<std::size_t>(k));
    } else {
        for (std::size_t k = 0; k < n; ++k) fn(k);
    }
}

void summarize(DpwResult& res, const std::vector<PointSplit>& pts) {
    for (std::size_t k = 0; k < pts.size(); ++k) {
        if (!pts[k].ok) continue;
        res.max_residual = std::max(res.max_residual, pts[k].residual);
        res.max_reality = std::max(res.max_reality, pts[k].reality);
        res.matching_defect = std::max(res.matching_defect, pts[k].matching);
        if (pts[k].retried) ++res.retries;
    }
}

}  // namespace

DpwResult dpw_conformal(const GeometrySpec& geom, const Potential& eta, const Grid& grid, const DpwOptions& opts) {
    if (!is_conformal(geom)) throw Error(ErrorKind::ConfigError, "geometry: dpw_conformal needs a conformal tag");
    if (grid.na < 3 || grid.nb < 3) throw Error(ErrorKind::GridTooSmall, "need at least 3 points per side");
    std::vector<cd> nodes;
    for (int i = 0; i < grid.na; ++i)
        for (int j = 0; j < grid.nb; ++j) nodes.emplace_back(grid.a(i), grid.b(j));
    check_potential(eta, nodes, -1);

    const int Nmax = std::max(opts.N, opts.retry_N);
    Field<LaurentLoop> C(grid, LaurentLoop(Nmax, true));
    {
        std::vector<cd> row;
        for (int i = 0; i < grid.na; ++i) row.emplace_back(grid.a(i), grid.b(0));
        const auto first = integrate_potential(eta, row, LaurentLoop::identity(Nmax), opts.substeps);
        auto column = [&](std::size_t i) {
            std::vector<cd> col;
            for (int j = 0; j < grid.nb; ++j) col.emplace_back(grid.a(static_cast<int>(i)), grid.b(j));
            LaurentLoop start = first[i];
            start.set_twisted(true);
            const auto line = integrate_potential(eta, col, start, opts.substeps);
            for (int j = 0; j < grid.nb; ++j) C(static_cast<int>(i), j) = line[static_cast<std::size_t>(j)];
        };
        for_points(static_cast<std::size_t>(grid.na), opts.exec, column);
    }

    std::vector<PointSplit> pts(grid.size());
    auto split_point = [&](std::size_t k) {
        PointSplit& p = pts[k];
        const int tries[2] = {opts.N, Nmax};
        for (int t = 0; t < 2 && !p.ok; ++t) {
            if (t == 1 && tries[1] == tries[0]) break;
            const LaurentLoop Ck = C.values[k].resized(tries[t]);
            if (Ck.tail() > opts.split.tol) continue;
            try {
                const LoopFactorPair s = iwasawa_split(Ck, geom.involution, opts.split);
                if (s.other.tail() > opts.split.tol) continue;
                p.F = s.other;
                p.plus0 = s.plus[0];
                p.residual = s.residual;
                p.reality = s.reality;
                p.ok = true;
                p.retried = t == 1;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::NoConvergence && e.kind() != ErrorKind::SingularCell) throw;
            }
        }
    };
    for_points(pts.size(), opts.exec, split_point);

    DpwResult res;
    res.mask = Field<unsigned char>(grid, 0);
    res.omega = ScalarField(grid, 0.0);
    const MatSampler& low = eta.coeffs.begin()->second;
    for (int i = 0; i < grid.na; ++i)
        for (int j = 0; j < grid.nb; ++j) {
            const PointSplit& p = pts[grid.index(i, j)];
            if (!p.ok) {
                res.mask(i, j) = 1;
                continue;
            }
            const cd top = p.plus0(0, 0) * low(cd(grid.a(i), grid.b(j)))(0, 2);
            res.omega(i, j) = 2.0 * std::log(std::abs(top));
        }
    summarize(res, pts);
    fill_frames(res, grid, pts, opts, Mat3::Identity());
    res.mesh = extract_surface(geom, res.frames.front());

    ValidationOptions vo;
    vo.Q = opts.expected_Q;
    vo.R = opts.expected_R;
    vo.tol = opts.tol;
    vo.mask = &res.mask;
    res.report = validate_surface(geom, res.mesh, res.omega, vo);
    return res;
}

DpwResult dpw_asymptotic(const GeometrySpec& geom, const PotentialPair& pair, const Grid& grid,
                         const DpwOptions& opts) {
    if (is_conformal(geom)) throw Error(ErrorKind::ConfigError, "geometry: dpw_asymptotic needs an asymptotic tag");
    if (grid.na < 3 || grid.nb < 3) throw Error(ErrorKind::GridTooSmall, "need at least 3 points per side");
    std::vector<double> us, vs;
    for (int i = 0; i < grid.na; ++i) us.push_back(grid.a(i));
    for (int j = 0; j < grid.nb; ++j) vs.push_back(grid.b(j));
    check_potential_pair(pair, geom.involution, us, vs);

    const int Nmax = std::max(opts.N, opts.retry_N);
    const std::vector<cd> upath(us.begin(), us.end()), vpath(vs.begin(), vs.end());
    const auto C1 = integrate_potential(pair.eta1, upath, LaurentLoop::identity(Nmax), opts.substeps);
    const auto C2 = integrate_potential(pair.eta2, vpath, LaurentLoop::identity(Nmax), opts.substeps);
    std::vector<LaurentLoop> C1inv;
    for (const auto& c : C1) C1inv.push_back(loop_inverse(c));

    const std::vector<cd> circ = circle(opts.split.circle_samples);
    std::vector<PointSplit> pts(grid.size());
    auto split_point = [&](std::size_t k) {
        const std::size_t i = k / static_cast<std::size_t>(grid.nb), j = k % static_cast<std::size_t>(grid.nb);
        PointSplit& p = pts[k];
        const int tries[2] = {opts.N, Nmax};
        for (int t = 0; t < 2 && !p.ok; ++t) {
            if (t == 1 && tries[1] == tries[0]) break;
            const int n = tries[t];
            try {
                const LaurentLoop c1 = C1[i].resized(n), c2 = C2[j].resized(n);
                const LaurentLoop X = loop_mul(C1inv[i].resized(n), c2);
                if (std::max(X.tail(), c2.tail()) > opts.split.tol) continue;
                const LoopFactorPair s = birkhoff_split(X, opts.split);
                p.F = loop_mul(c1, s.plus);
                if (p.F.tail() > opts.split.tol) continue;
                p.plus0 = s.plus[0];
                p.residual = s.residual;
                double match = 0.0;
                for (cd lam : circ)
                    match = std::max(match, (loop_eval(c1, lam) * loop_eval(s.plus, lam) -
                                             loop_eval(c2, lam) * loop_eval(s.other, lam))
                                                .norm());
                p.matching = match;
                p.ok = match <= opts.split.tol;
                p.retried = t == 1;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::NoConvergence && e.kind() != ErrorKind::SingularCell) throw;
            }
        }
    };
    for_points(pts.size(), opts.exec, split_point);

    // Diagonal gauge restoring the coordinate-frame normalization at the base point.
    const Mat3 A = pair.eta1.coeffs.begin()->second(cd(us[0]));
    const Mat3 B = pair.eta2.coeffs.rbegin()->second(cd(vs[0]));
    const cd t = std::sqrt(A(0, 2) / B(1, 2));
    Mat3 F0 = Mat3::Identity();
    F0(0, 0) = t;
    F0(1, 1) = 1.0 / t;

    DpwResult res;
    res.mask = Field<unsigned char>(grid, 0);
    res.omega = ScalarField(grid, 0.0);
    const MatSampler& low = pair.eta1.coeffs.begin()->second;
    for (int i = 0; i < grid.na; ++i)
        for (int j = 0; j < grid.nb; ++j) {
            const PointSplit& p = pts[grid.index(i, j)];
            if (!p.ok) {
                res.mask(i, j) = 1;
                continue;
            }
            const cd h = low(cd(grid.a(i)))(0, 2) / (t * p.plus0(0, 0));
            res.omega(i, j) = 2.0 * std::log(std::abs(h));
        }
    summarize(res, pts);
    fill_frames(res, grid, pts, opts, F0);
    res.mesh = extract_surface(geom, res.frames.front());

    ValidationOptions vo;
    vo.Q = opts.expected_Q;
    vo.R = opts.expected_R;
    vo.tol = opts.tol;
    vo.mask = &res.mask;
    res.report = validate_surface(geom, res.mesh, res.omega, vo);
    return res;
}

}  // namespace toda
