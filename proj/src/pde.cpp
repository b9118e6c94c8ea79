#include "toda/pde.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace toda {

namespace {

// Nonlinear part of the conformal equation and its omega-derivative.
void conformal_terms(Tag tag, double w, double q2, double& f, double& df) {
    const double e1 = std::exp(w);
    const double e2 = std::exp(-2.0 * w);
    switch (tag) {
        case Tag::CP2: f = e1 - q2 * e2; df = e1 + 2.0 * q2 * e2; return;
        case Tag::CH2: f = -e1 - q2 * e2; df = -e1 + 2.0 * q2 * e2; return;
        case Tag::AffDefEll: f = e1 + q2 * e2; df = e1 - 2.0 * q2 * e2; return;
        case Tag::AffDefHyp: f = -e1 + q2 * e2; df = -e1 - 2.0 * q2 * e2; return;
        default: throw Error(ErrorKind::ConfigError, "geometry: elliptic solver needs a conformal tag");
    }
}

}  // namespace

EllipticResult solve_elliptic(const GeometrySpec& geom, const Sampler& Q, const ScalarField& boundary,
                              const std::optional<ScalarField>& forcing, const EllipticOptions& opts) {
    if (!is_conformal(geom)) throw Error(ErrorKind::ConfigError, "geometry: elliptic solver needs a conformal tag");
    const Grid& g = boundary.grid;
    if (g.na < 3 || g.nb < 3) throw Error(ErrorKind::GridTooSmall, "need at least 3 points per side");

    const int mi = g.na - 2, mj = g.nb - 2;
    const int n = mi * mj;
    auto id = [&](int i, int j) { return (i - 1) * mj + (j - 1); };

    std::vector<double> q2(g.size()), frc(g.size(), 0.0);
    for (int i = 0; i < g.na; ++i)
        for (int j = 0; j < g.nb; ++j) {
            q2[g.index(i, j)] = std::norm(Q(g.a(i), g.b(j)));
            if (forcing) frc[g.index(i, j)] = (*forcing)(i, j);
        }

    ScalarField w(g, 0.0);
    for (int i = 0; i < g.na; ++i)
        for (int j = 0; j < g.nb; ++j)
            if (i == 0 || j == 0 || i == g.na - 1 || j == g.nb - 1) w(i, j) = boundary(i, j);

    const double cx = 0.25 / (g.ha * g.ha), cy = 0.25 / (g.hb * g.hb);

    auto residual = [&](const ScalarField& u, Eigen::VectorXd& F) {
        F.resize(n);
        for (int i = 1; i < g.na - 1; ++i)
            for (int j = 1; j < g.nb - 1; ++j) {
                const double lap = cx * (u(i + 1, j) - 2.0 * u(i, j) + u(i - 1, j)) +
                                   cy * (u(i, j + 1) - 2.0 * u(i, j) + u(i, j - 1));
                double f, df;
                conformal_terms(geom.tag, u(i, j), q2[g.index(i, j)], f, df);
                F(id(i, j)) = lap + f + frc[g.index(i, j)];
            }
    };

    Eigen::SparseMatrix<double> J(n, n);
    J.reserve(Eigen::VectorXi::Constant(n, 5));
    for (int i = 1; i < g.na - 1; ++i)
        for (int j = 1; j < g.nb - 1; ++j) {
            const int r = id(i, j);
            J.insert(r, r) = 1.0;
            if (i > 1) J.insert(r, id(i - 1, j)) = cx;
            if (i < g.na - 2) J.insert(r, id(i + 1, j)) = cx;
            if (j > 1) J.insert(r, id(i, j - 1)) = cy;
            if (j < g.nb - 2) J.insert(r, id(i, j + 1)) = cy;
        }
    J.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(J);

    EllipticResult res;
    Eigen::VectorXd F;
    residual(w, F);
    double fnorm = F.size() ? F.lpNorm<Eigen::Infinity>() : 0.0;
    while (true) {
        res.history.push_back(fnorm);
        if (fnorm < opts.tol) break;
        if (res.iterations >= opts.max_iterations) {
            Error e(ErrorKind::NoConvergence, "elliptic Newton did not reach tolerance");
            e.history = res.history;
            throw e;
        }
        for (int i = 1; i < g.na - 1; ++i)
            for (int j = 1; j < g.nb - 1; ++j) {
                double f, df;
                conformal_terms(geom.tag, w(i, j), q2[g.index(i, j)], f, df);
                J.coeffRef(id(i, j), id(i, j)) = -2.0 * (cx + cy) + df;
            }
        lu.factorize(J);
        if (lu.info() != Eigen::Success) {
            Error e(ErrorKind::NoConvergence, "singular Newton linearization");
            e.history = res.history;
            throw e;
        }
        const Eigen::VectorXd step = lu.solve(-F);

        double t = 1.0;
        ScalarField trial = w;
        Eigen::VectorXd Ft;
        double tnorm = 0.0;
        for (int halvings = 0;; ++halvings) {
            for (int i = 1; i < g.na - 1; ++i)
                for (int j = 1; j < g.nb - 1; ++j) trial(i, j) = w(i, j) + t * step(id(i, j));
            residual(trial, Ft);
            tnorm = Ft.lpNorm<Eigen::Infinity>();
            if (tnorm <= (1.0 - 1e-4 * t) * fnorm || halvings >= 30) break;
            t *= 0.5;
        }
        w = std::move(trial);
        F = std::move(Ft);
        fnorm = tnorm;
        ++res.iterations;
    }

    const ScalarField chk = tzitzeica_residual(geom, w, Q, conj_sampler(Q));
    for (int i = 1; i < g.na - 1; ++i)
        for (int j = 1; j < g.nb - 1; ++j)
            res.certificate = std::max(res.certificate, std::abs(chk(i, j) + frc[g.index(i, j)]));
    res.omega = std::move(w);
    return res;
}

GoursatData zero_goursat(const Grid& grid) {
    return {std::vector<double>(static_cast<std::size_t>(grid.na), 0.0),
            std::vector<double>(static_cast<std::size_t>(grid.nb), 0.0)};
}

HyperbolicResult solve_hyperbolic(const GeometrySpec& geom, const Sampler& Q, const Sampler& R,
                                  const GoursatData& data, const Grid& g, const RealForcing& forcing,
                                  const HyperbolicOptions& opts, Exec exec) {
    if (is_conformal(geom)) throw Error(ErrorKind::ConfigError, "geometry: hyperbolic solver needs an asymptotic tag");
    if (g.na < 3 || g.nb < 3) throw Error(ErrorKind::GridTooSmall, "need at least 3 points per side");
    if (static_cast<int>(data.u_axis.size()) != g.na || static_cast<int>(data.v_axis.size()) != g.nb)
        throw Error(ErrorKind::ConfigError, "data.goursat: axis lengths must match grid.dims");
    if (std::abs(data.u_axis[0] - data.v_axis[0]) > 1e-12)
        throw Error(ErrorKind::ConfigError, "data.goursat: axes disagree at the corner");

    std::vector<double> qr(g.size()), frc(g.size(), 0.0);
    for (int i = 0; i < g.na; ++i)
        for (int j = 0; j < g.nb; ++j) {
            PointData p;
            p.Q = Q(g.a(i), g.b(j));
            p.R = R(g.a(i), g.b(j));
            check_point_reality(geom, p);
            qr[g.index(i, j)] = (p.Q * p.R).real();
            if (forcing) frc[g.index(i, j)] = forcing(g.a(i), g.b(j));
        }

    ScalarField w(g, 0.0);
    for (int i = 0; i < g.na; ++i) w(i, 0) = data.u_axis[static_cast<std::size_t>(i)];
    for (int j = 0; j < g.nb; ++j) w(0, j) = data.v_axis[static_cast<std::size_t>(j)];

    const double area = g.ha * g.hb;
    auto G = [&](int i, int j, double val) {
        const std::size_t k = g.index(i, j);
        return std::exp(val) - qr[k] * std::exp(-2.0 * val) - frc[k];
    };

    std::vector<double> cell_defect(g.size(), 0.0);
    bool blown = false;
    int bi = -1, bj = -1;

    auto cell = [&](int i, int j) {
        // Updates w(i, j) from its south, west and south-west neighbours.
        const double base = w(i - 1, j) + w(i, j - 1) - w(i - 1, j - 1);
        const double known = G(i - 1, j - 1, w(i - 1, j - 1)) + G(i - 1, j, w(i - 1, j)) + G(i, j - 1, w(i, j - 1));
        double v = base + area * G(i - 1, j - 1, w(i - 1, j - 1));
        double next = v;
        for (int it = 0; it < opts.max_corrections; ++it) {
            if (!std::isfinite(v) || std::abs(v) > opts.blowup_guard) break;
            next = base + 0.25 * area * (known + G(i, j, v));
            const double change = std::abs(next - v);
            v = next;
            if (change <= opts.corrector_tol * std::max(1.0, std::abs(v))) break;
        }
        w(i, j) = v;
        cell_defect[g.index(i, j)] = std::isfinite(v) ? std::abs(v - base - 0.25 * area * (known + G(i, j, v))) : 0.0;
    };

    auto check_guard = [&](int i, int j) {
        const double v = w(i, j);
        return !std::isfinite(v) || std::abs(v) > opts.blowup_guard;
    };

    if (exec == Exec::Serial) {
        for (int i = 1; i < g.na && !blown; ++i)
            for (int j = 1; j < g.nb; ++j) {
                cell(i, j);
                if (check_guard(i, j)) {
                    blown = true;
                    bi = i;
                    bj = j;
                    break;
                }
            }
    } else {
        for (int d = 2; d <= (g.na - 1) + (g.nb - 1) && !blown; ++d) {
            const int ilo = std::max(1, d - (g.nb - 1));
            const int ihi = std::min(g.na - 1, d - 1);
#pragma omp parallel for schedule(static)
            for (int i = ilo; i <= ihi; ++i) cell(i, d - i);
            for (int i = ilo; i <= ihi; ++i)
                if (check_guard(i, d - i)) {
                    blown = true;
                    bi = i;
                    bj = d - i;
                    break;
                }
        }
    }
    for (int i = 0; i < g.na && !blown; ++i)
        for (int j = 0; j < g.nb; ++j)
            if (check_guard(i, j)) {
                blown = true;
                bi = i;
                bj = j;
                break;
            }
    if (blown) {
        Error e(ErrorKind::Blowup, "omega exceeded the overflow guard");
        e.indices.emplace_back(bi, bj);
        throw e;
    }

    HyperbolicResult res;
    for (double c : cell_defect) res.scheme_residual = std::max(res.scheme_residual, c / area);
    const ScalarField chk = tzitzeica_residual(geom, w, Q, R);
    for (int i = 1; i < g.na - 1; ++i)
        for (int j = 1; j < g.nb - 1; ++j)
            res.certificate = std::max(res.certificate, std::abs(chk(i, j) + frc[g.index(i, j)]));
    res.omega = std::move(w);
    return res;
}

}  // namespace toda
