#include "toda/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace toda {

using nlohmann::json;

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::Solve: return "solve";
        case Mode::LaxCheck: return "lax-check";
        case Mode::Integrate: return "integrate";
        case Mode::Dpw: return "dpw";
        case Mode::Classify: return "classify";
    }
    return "?";
}

Mode mode_from_name(const std::string& name) {
    for (Mode m : {Mode::Solve, Mode::LaxCheck, Mode::Integrate, Mode::Dpw, Mode::Classify})
        if (name == mode_name(m)) return m;
    throw Error(ErrorKind::ConfigError, "mode: unknown value '" + name + "'");
}

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
    throw Error(ErrorKind::ConfigError, field + ": " + why);
}

double get_number(const json& j, const std::string& field) {
    if (!j.is_number()) bad(field, "expected a number");
    return j.get<double>();
}

cd get_complex(const json& j, const std::string& field) {
    if (j.is_number()) return j.get<double>();
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    bad(field, "expected a number or [re, im]");
}

std::vector<cd> get_complex_list(const json& j, const std::string& field) {
    if (!j.is_array()) bad(field, "expected a list");
    std::vector<cd> out;
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(get_complex(j[k], field + "[" + std::to_string(k) + "]"));
    return out;
}

Mat3 get_matrix(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 3) bad(field, "expected a 3x3 matrix");
    Mat3 M;
    for (int r = 0; r < 3; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || row.size() != 3) bad(field, "expected a 3x3 matrix");
        for (int c = 0; c < 3; ++c)
            M(r, c) = get_complex(row[static_cast<std::size_t>(c)], field + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
    return M;
}

Sampler get_sampler(const json& j, const std::string& field) {
    if (j.is_number() || j.is_array()) return constant_sampler(get_complex(j, field));
    if (!j.is_object() || j.size() != 1) bad(field, "expected a constant or one of {constant, poly_z, poly_a, poly_b}");
    const auto& [kind, val] = *j.items().begin();
    if (kind == "constant") return constant_sampler(get_complex(val, field + ".constant"));
    const std::vector<cd> coeffs = get_complex_list(val, field + "." + kind);
    if (kind == "poly_z") return poly_z_sampler(coeffs);
    if (kind == "poly_a") return poly_a_sampler(coeffs);
    if (kind == "poly_b") return poly_b_sampler(coeffs);
    bad(field, "unknown sampler kind '" + kind + "'");
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json cjson(cd z) { return json::array({z.real(), z.imag()}); }

json mjson(const Mat3& M) {
    json rows = json::array();
    for (int r = 0; r < 3; ++r) {
        json row = json::array();
        for (int c = 0; c < 3; ++c) row.push_back(cjson(M(r, c)));
        rows.push_back(row);
    }
    return rows;
}

void dump_rec(const json& j, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const std::string close(static_cast<std::size_t>(indent), ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad + json(it.key()).dump() + ": ";
                dump_rec(it.value(), out, indent + 2);
            }
            out += "\n" + close + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
            if (flat) {
                out += "[";
                for (std::size_t k = 0; k < j.size(); ++k) {
                    if (k) out += ", ";
                    dump_rec(j[k], out, indent);
                }
                out += "]";
                return;
            }
            out += "[\n";
            for (std::size_t k = 0; k < j.size(); ++k) {
                if (k) out += ",\n";
                out += pad;
                dump_rec(j[k], out, indent + 2);
            }
            out += "\n" + close + "]";
            return;
        }
        case json::value_t::number_float: {
            const double v = j.get<double>();
            out += std::isfinite(v) ? fmt_double(v) : "null";
            return;
        }
        default: out += j.dump();
    }
}

}  // namespace

std::string dump_json(const json& j) {
    std::string out;
    dump_rec(j, out, 0);
    out += "\n";
    return out;
}

void write_atomic(const std::string& path, const std::string& content) {
    const std::filesystem::path target(path);
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp);
        f << content;
        if (!f) throw std::runtime_error("cannot write " + tmp);
    }
    std::filesystem::rename(tmp, target);
}

void export_mesh(const SurfaceMesh& mesh, MeshFormat format, const std::string& path, bool chart) {
    const Grid& g = mesh.samples.grid;
    const bool lift = mesh.representation == Representation::HomogeneousLift;
    if (format == MeshFormat::OBJ && lift && !chart)
        throw Error(ErrorKind::UnsupportedRepresentation, "homogeneous lift needs a chart projection for OBJ");

    std::vector<std::array<double, 3>> pts;
    if (!lift || chart) {
        Error err(ErrorKind::UnsupportedRepresentation, "chart projection undefined where f3 = 0");
        for (int i = 0; i < g.na; ++i)
            for (int j = 0; j < g.nb; ++j) {
                const Vec3& f = mesh.samples(i, j);
                if (lift) {
                    if (std::abs(f(2)) < 1e-12) {
                        err.indices.emplace_back(i, j);
                        continue;
                    }
                    const cd w1 = f(0) / f(2), w2 = f(1) / f(2);
                    pts.push_back({w1.real(), w1.imag(), w2.real()});
                } else {
                    pts.push_back({f(0).real(), f(1).real(), f(2).real()});
                }
            }
        if (!err.indices.empty()) throw err;
    }

    std::ostringstream os;
    if (format == MeshFormat::OBJ) {
        for (const auto& p : pts) os << "v " << fmt_double(p[0]) << ' ' << fmt_double(p[1]) << ' ' << fmt_double(p[2]) << '\n';
        for (int i = 0; i + 1 < g.na; ++i)
            for (int j = 0; j + 1 < g.nb; ++j) {
                auto id = [&](int a, int b) { return a * g.nb + b + 1; };
                os << "f " << id(i, j) << ' ' << id(i + 1, j) << ' ' << id(i + 1, j + 1) << ' ' << id(i, j + 1) << '\n';
            }
    } else if (!lift || chart) {
        os << "u,v,x,y,z\n";
        std::size_t k = 0;
        for (int i = 0; i < g.na; ++i)
            for (int j = 0; j < g.nb; ++j, ++k)
                os << fmt_double(g.a(i)) << ',' << fmt_double(g.b(j)) << ',' << fmt_double(pts[k][0]) << ','
                   << fmt_double(pts[k][1]) << ',' << fmt_double(pts[k][2]) << '\n';
    } else {
        os << "u,v,re1,im1,re2,im2,re3,im3\n";
        for (int i = 0; i < g.na; ++i)
            for (int j = 0; j < g.nb; ++j) {
                const Vec3& f = mesh.samples(i, j);
                os << fmt_double(g.a(i)) << ',' << fmt_double(g.b(j));
                for (int c = 0; c < 3; ++c) os << ',' << fmt_double(f(c).real()) << ',' << fmt_double(f(c).imag());
                os << '\n';
            }
    }
    write_atomic(path, os.str());
}

PipelineConfig parse_config(const json& j, const std::optional<Mode>& mode) {
    if (!j.is_object()) bad("config", "expected a JSON object");
    PipelineConfig cfg;
    if (j.contains("mode")) {
        if (!j["mode"].is_string()) bad("mode", "expected a string");
        cfg.mode = mode_from_name(j["mode"].get<std::string>());
        if (mode && *mode != cfg.mode) bad("mode", "config says '" + std::string(mode_name(cfg.mode)) + "'");
    } else if (mode) {
        cfg.mode = *mode;
    } else {
        bad("mode", "missing");
    }

    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        if (!t.is_object()) bad("tolerances", "expected an object");
        auto set = [&](const char* key, double& dst) {
            if (!t.contains(key)) return;
            dst = get_number(t[key], std::string("tolerances.") + key);
            if (!(dst > 0.0)) bad(std::string("tolerances.") + key, "must be positive");
        };
        set("residual", cfg.tol.residual);
        set("path", cfg.tol.path);
        set("validation", cfg.tol.validation);
        set("symmetry", cfg.tol.symmetry);
        set("split", cfg.tol.split);
    }
    if (j.contains("output")) {
        const json& o = j["output"];
        if (!o.is_object()) bad("output", "expected an object");
        auto str = [&](const char* key, std::string& dst) {
            if (!o.contains(key)) return;
            if (!o[key].is_string()) bad(std::string("output.") + key, "expected a string");
            dst = o[key].get<std::string>();
        };
        str("summary", cfg.output.summary);
        str("mesh", cfg.output.mesh);
        str("mesh_format", cfg.output.mesh_format);
        str("csv", cfg.output.csv);
        if (cfg.output.mesh_format != "obj" && cfg.output.mesh_format != "csv")
            bad("output.mesh_format", "expected 'obj' or 'csv'");
        if (o.contains("chart")) {
            if (!o["chart"].is_boolean()) bad("output.chart", "expected a boolean");
            cfg.output.chart = o["chart"].get<bool>();
        }
        if (cfg.output.summary.empty()) bad("output.summary", "must not be empty");
    }
    if (j.contains("trunc")) {
        if (!j["trunc"].is_number_integer() || j["trunc"].get<int>() < 1) bad("trunc", "expected a positive integer");
        cfg.trunc = j["trunc"].get<int>();
    }

    if (cfg.mode == Mode::Classify) {
        if (!j.contains("classify") || !j["classify"].is_object()) bad("classify", "missing");
        const json& c = j["classify"];
        const std::string fam = c.value("family", "");
        const std::string rel = c.value("relation", "");
        if (fam == "conjugation") cfg.family = Family::Conjugation;
        else if (fam == "outer") cfg.family = Family::Outer;
        else bad("classify.family", "expected 'conjugation' or 'outer'");
        if (rel == "commuting") cfg.relation = Relation::Commuting;
        else if (rel == "split") cfg.relation = Relation::Split;
        else bad("classify.relation", "expected 'commuting' or 'split'");
        return cfg;
    }

    if (!j.contains("geometry") || !j["geometry"].is_string()) bad("geometry", "missing");
    cfg.tag = tag_from_name(j["geometry"].get<std::string>());

    if (!j.contains("grid") || !j["grid"].is_object()) bad("grid", "missing");
    const json& gj = j["grid"];
    auto pair = [&](const char* key, bool required, std::array<double, 2> dflt) {
        const std::string field = std::string("grid.") + key;
        if (!gj.contains(key)) {
            if (required) bad(field, "missing");
            return dflt;
        }
        const json& v = gj[key];
        if (!v.is_array() || v.size() != 2) bad(field, "expected two entries");
        return std::array<double, 2>{get_number(v[0], field), get_number(v[1], field)};
    };
    const auto origin = pair("origin", false, {0.0, 0.0});
    const auto dims = pair("dims", true, {0.0, 0.0});
    const auto spacing = pair("spacing", true, {0.0, 0.0});
    if (dims[0] != std::floor(dims[0]) || dims[1] != std::floor(dims[1])) bad("grid.dims", "expected integers");
    if (dims[0] < 3 || dims[1] < 3) bad("grid.dims", "need at least 3 points per side");
    if (!(spacing[0] > 0.0) || !(spacing[1] > 0.0)) bad("grid.spacing", "must be positive");
    cfg.grid.a0 = origin[0];
    cfg.grid.b0 = origin[1];
    cfg.grid.na = static_cast<int>(dims[0]);
    cfg.grid.nb = static_cast<int>(dims[1]);
    cfg.grid.ha = spacing[0];
    cfg.grid.hb = spacing[1];

    if (j.contains("data")) {
        if (!j["data"].is_object()) bad("data", "expected an object");
        cfg.data = j["data"];
    }
    if (j.contains("lambda")) {
        const json& l = j["lambda"];
        // A bare pair of numbers is one complex sample; any other array is a list of samples.
        const bool list = l.is_array() && (l.size() != 2 || l[0].is_array());
        cfg.lambdas = list ? get_complex_list(l, "lambda") : std::vector<cd>{get_complex(l, "lambda")};
        if (cfg.lambdas.empty()) bad("lambda", "expected at least one sample");
        for (cd z : cfg.lambdas)
            if (z == cd(0.0)) bad("lambda", "samples must be nonzero");
    }
    if (cfg.mode == Mode::Dpw) {
        if (!j.contains("potential") || !j["potential"].is_object()) bad("potential", "missing");
        cfg.potential = j["potential"];
    }
    return cfg;
}

namespace {

struct Gates {
    json items = json::object();
    bool pass = true;

    void add(const std::string& name, double value, double tol) {
        const bool ok = std::isfinite(value) && value < tol;
        items[name] = {{"value", value}, {"tol", tol}, {"pass", ok}};
        pass = pass && ok;
    }
    void add_flag(const std::string& name, bool ok) {
        items[name] = {{"pass", ok}};
        pass = pass && ok;
    }
};

class Stopwatch {
public:
    explicit Stopwatch(json& sink) : sink_(sink) {}
    template <typename Fn>
    auto time(const std::string& name, Fn&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        auto finish = [&] { sink_[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            finish();
        } else {
            auto r = fn();
            finish();
            return r;
        }
    }

private:
    json& sink_;
};

// Rethrows library errors with the pipeline stage in front.
template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        std::string msg = e.what();
        const std::string prefix = std::string(to_string(e.kind())) + ": ";
        if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
        Error wrapped(e.kind(), name + ": " + msg);
        wrapped.history = e.history;
        wrapped.indices = e.indices;
        throw wrapped;
    }
}

Sampler sampler_or(const json& data, const char* key, Sampler fallback) {
    if (!data.contains(key)) return fallback;
    return get_sampler(data[key], std::string("data.") + key);
}

struct DataSamplers {
    Sampler Q, R;
};

DataSamplers data_samplers(const PipelineConfig& cfg, const GeometrySpec& geom) {
    DataSamplers s;
    s.Q = sampler_or(cfg.data, "Q", constant_sampler(1.0));
    s.R = sampler_or(cfg.data, "R", is_conformal(geom) ? conj_sampler(s.Q) : s.Q);
    return s;
}

std::vector<double> axis_values(const json& data, const char* key, int n, double corner) {
    const std::string field = std::string("data.goursat.") + key;
    if (!data.contains("goursat")) return std::vector<double>(static_cast<std::size_t>(n), corner);
    const json& g = data["goursat"];
    if (!g.is_object()) bad("data.goursat", "expected an object");
    if (!g.contains(key)) return std::vector<double>(static_cast<std::size_t>(n), corner);
    const json& v = g[key];
    if (v.is_number()) return std::vector<double>(static_cast<std::size_t>(n), v.get<double>());
    if (!v.is_array() || static_cast<int>(v.size()) != n) bad(field, "expected a number or a list matching grid.dims");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(get_number(v[k], field));
    return out;
}

struct SolveOutcome {
    ScalarField omega;
    json summary = json::object();
};

SolveOutcome solve_omega(const PipelineConfig& cfg, const GeometrySpec& geom, const DataSamplers& s, Gates& gates) {
    SolveOutcome out;
    const Grid& g = cfg.grid;
    if (is_conformal(geom)) {
        double bval = 0.0;
        if (cfg.data.contains("boundary")) bval = get_number(cfg.data["boundary"], "data.boundary");
        const EllipticResult r = stage("pde", [&] { return solve_elliptic(geom, s.Q, ScalarField(g, bval)); });
        out.omega = r.omega;
        out.summary = {{"solver", "elliptic"}, {"iterations", r.iterations}, {"history", r.history},
                       {"certificate", r.certificate}};
        gates.add("pde_certificate", r.certificate, cfg.tol.residual);
    } else {
        GoursatData d;
        d.u_axis = axis_values(cfg.data, "u", g.na, 0.0);
        d.v_axis = axis_values(cfg.data, "v", g.nb, d.u_axis.front());
        const HyperbolicResult r = stage("pde", [&] { return solve_hyperbolic(geom, s.Q, s.R, d, g); });
        out.omega = r.omega;
        out.summary = {{"solver", "hyperbolic"}, {"scheme_residual", r.scheme_residual}, {"certificate", r.certificate}};
        gates.add("pde_scheme_residual", r.scheme_residual, cfg.tol.residual);
    }
    double lo = out.omega.values.front(), hi = lo;
    for (double v : out.omega.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    out.summary["omega_min"] = lo;
    out.summary["omega_max"] = hi;
    return out;
}

SolveOutcome omega_for(const PipelineConfig& cfg, const GeometrySpec& geom, const DataSamplers& s, Gates& gates) {
    if (cfg.data.contains("omega")) {
        SolveOutcome out;
        out.omega = ScalarField(cfg.grid, get_number(cfg.data["omega"], "data.omega"));
        out.summary = {{"solver", "given"}};
        return out;
    }
    return solve_omega(cfg, geom, s, gates);
}

std::string join(const std::string& dir, const std::string& name) {
    if (dir.empty() || std::filesystem::path(name).is_absolute()) return name;
    return (std::filesystem::path(dir) / name).string();
}

json report_json(const ValidationReport& rep) {
    json checks = json::object();
    for (const auto& c : rep.checks) checks[c.name] = {{"defect", c.defect}, {"tol", c.tol}, {"pass", c.pass}};
    return {{"checks", checks}, {"points", rep.points}, {"pass", rep.pass()}};
}

void add_validation_gates(Gates& gates, const ValidationReport& rep, double tol) {
    for (const auto& c : rep.checks) gates.add("validation_" + c.name, c.defect, tol);
    gates.add_flag("validation_points", rep.points > 0);
}

void maybe_mesh(const PipelineConfig& cfg, const SurfaceMesh& mesh, const std::string& out_dir, json& summary) {
    if (cfg.output.mesh.empty()) return;
    const MeshFormat f = cfg.output.mesh_format == "csv" ? MeshFormat::CSV : MeshFormat::OBJ;
    stage("export", [&] {
        export_mesh(mesh, f, join(out_dir, cfg.output.mesh), cfg.output.chart);
        return 0;
    });
    summary["mesh"] = {{"path", cfg.output.mesh}, {"format", cfg.output.mesh_format},
                       {"vertices", static_cast<int>(mesh.samples.values.size())}};
}

MatSampler poly_matrix(const json& j, const std::string& field) {
    std::vector<Mat3> coeffs;
    if (j.is_array() && j.size() == 3 && j[0].is_array() && j[0].size() == 3 && !j[0][0].is_array()) {
        coeffs.push_back(get_matrix(j, field));
    } else if (j.is_array() && j.size() == 3 && j[0].is_array() && j[0].size() == 3 && j[0][0].is_array() &&
               j[0][0].size() == 2 && j[0][0][0].is_number()) {
        coeffs.push_back(get_matrix(j, field));
    } else {
        if (!j.is_array() || j.empty()) bad(field, "expected a matrix or a list of polynomial matrix coefficients");
        for (std::size_t k = 0; k < j.size(); ++k) coeffs.push_back(get_matrix(j[k], field + "[" + std::to_string(k) + "]"));
    }
    return [coeffs](cd z) {
        Mat3 acc = Mat3::Zero();
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
        return acc;
    };
}

Potential potential_from(const json& j, const std::string& field) {
    if (!j.is_object() || j.empty()) bad(field, "expected degree -> coefficients");
    Potential p;
    for (const auto& [key, val] : j.items()) {
        int deg = 0;
        try {
            std::size_t used = 0;
            deg = std::stoi(key, &used);
            if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
            bad(field + "." + key, "degree keys must be integers");
        }
        p.coeffs[deg] = poly_matrix(val, field + "." + key);
    }
    return p;
}

json run_solve(const PipelineConfig& cfg, const std::string& out_dir, Gates& gates, Stopwatch& sw) {
    const GeometrySpec geom = make_geometry(cfg.tag);
    const DataSamplers s = data_samplers(cfg, geom);
    SolveOutcome sol = sw.time("solve", [&] { return solve_omega(cfg, geom, s, gates); });
    json summary = sol.summary;
    if (!cfg.output.csv.empty()) {
        const ScalarField res = tzitzeica_residual(geom, sol.omega, s.Q, s.R);
        std::ostringstream os;
        os << "a,b,omega,residual\n";
        const Grid& g = cfg.grid;
        for (int i = 0; i < g.na; ++i)
            for (int j = 0; j < g.nb; ++j)
                os << fmt_double(g.a(i)) << ',' << fmt_double(g.b(j)) << ',' << fmt_double(sol.omega(i, j)) << ','
                   << fmt_double(res(i, j)) << '\n';
        write_atomic(join(out_dir, cfg.output.csv), os.str());
        summary["csv"] = cfg.output.csv;
    }
    return summary;
}

json run_lax_check(const PipelineConfig& cfg, Gates& gates, Stopwatch& sw) {
    const GeometrySpec geom = make_geometry(cfg.tag);
    const DataSamplers s = data_samplers(cfg, geom);
    const SolveOutcome sol = omega_for(cfg, geom, s, gates);
    const ScalarField wa = diff_a(sol.omega), wb = diff_b(sol.omega);
    double twist = 0.0, reality = 0.0;
    sw.time("symmetry", [&] {
        const Grid& g = cfg.grid;
        for (int i = 0; i < g.na; ++i)
            for (int j = 0; j < g.nb; ++j) {
                PointData p;
                p.omega = sol.omega(i, j);
                p.omega_a = wa(i, j);
                p.omega_b = wb(i, j);
                p.Q = s.Q(g.a(i), g.b(j));
                p.R = s.R(g.a(i), g.b(j));
                const SymmetryDefects d = stage("geometry", [&] { return symmetry_defects(geom, p); });
                twist = std::max(twist, d.twist);
                reality = std::max(reality, d.reality);
            }
    });
    json flat = json::array();
    for (cd lam : cfg.lambdas) flat.push_back({{"lambda", cjson(lam)}, {"defect", flatness_defect(geom, sol.omega, s.Q, s.R, lam)}});
    gates.add("twist", twist, cfg.tol.symmetry);
    gates.add("reality", reality, cfg.tol.symmetry);
    return {{"omega", sol.summary}, {"twist", twist}, {"reality", reality}, {"flatness", flat}};
}

json run_integrate(const PipelineConfig& cfg, const std::string& out_dir, Gates& gates, Stopwatch& sw) {
    const GeometrySpec geom = make_geometry(cfg.tag);
    const DataSamplers s = data_samplers(cfg, geom);
    const SolveOutcome sol = sw.time("solve", [&] { return omega_for(cfg, geom, s, gates); });
    json summary = {{"omega", sol.summary}};
    json frames = json::array();
    FrameOptions fo;
    fo.residual_threshold = std::max(cfg.tol.residual, 1e-6);
    std::optional<FrameField> first;
    for (cd lam : cfg.lambdas) {
        FrameField F = sw.time("integrate", [&] {
            return stage("frames", [&] { return integrate_frame(geom, sol.omega, s.Q, s.R, lam, Mat3::Identity(), fo); });
        });
        frames.push_back({{"lambda", cjson(lam)}, {"path_defect", F.path_defect}, {"det_drift", F.det_drift}});
        gates.add("path_defect_" + std::to_string(frames.size() - 1), F.path_defect, cfg.tol.path);
        if (!first) first = std::move(F);
    }
    summary["frames"] = frames;
    if (geom.tag == Tag::AffDefEll || geom.tag == Tag::AffDefHyp) {
        const FrameField R = stage("frames", [&] { return real_frame_conjugate(geom, *first); });
        summary["imaginary_residue"] = imaginary_residue(R);
        gates.add("imaginary_residue", imaginary_residue(R), 1e-8);
    }
    const SurfaceMesh mesh = extract_surface(geom, *first);
    ValidationOptions vo;
    vo.Q = s.Q;
    vo.R = s.R;
    vo.tol = cfg.tol.validation;
    const ValidationReport rep = sw.time("validate", [&] { return validate_surface(geom, mesh, sol.omega, vo); });
    summary["validation"] = report_json(rep);
    add_validation_gates(gates, rep, cfg.tol.validation);
    maybe_mesh(cfg, mesh, out_dir, summary);
    return summary;
}

json run_dpw(const PipelineConfig& cfg, const std::string& out_dir, Gates& gates, Stopwatch& sw) {
    const GeometrySpec geom = make_geometry(cfg.tag);
    DpwOptions o;
    o.N = cfg.trunc;
    o.retry_N = std::max(16, cfg.trunc);
    o.lambdas = cfg.lambdas;
    o.tol = cfg.tol.validation;
    o.split.tol = cfg.tol.split;
    if (cfg.data.contains("Q")) o.expected_Q = get_sampler(cfg.data["Q"], "data.Q");
    if (cfg.data.contains("R")) o.expected_R = get_sampler(cfg.data["R"], "data.R");
    DpwResult r;
    if (is_conformal(geom)) {
        const Potential eta = potential_from(cfg.potential, "potential");
        r = sw.time("dpw", [&] { return stage("factorization", [&] { return dpw_conformal(geom, eta, cfg.grid, o); }); });
    } else {
        if (!cfg.potential.contains("du")) bad("potential.du", "missing");
        if (!cfg.potential.contains("dv")) bad("potential.dv", "missing");
        PotentialPair pp{potential_from(cfg.potential["du"], "potential.du"),
                         potential_from(cfg.potential["dv"], "potential.dv")};
        r = sw.time("dpw", [&] { return stage("factorization", [&] { return dpw_asymptotic(geom, pp, cfg.grid, o); }); });
    }
    int masked = 0;
    for (unsigned char m : r.mask.values) masked += m;
    json summary = {{"max_residual", r.max_residual}, {"max_reality", r.max_reality}, {"masked", masked},
                    {"retries", r.retries}, {"validation", report_json(r.report)}};
    if (!is_conformal(geom)) {
        summary["matching_defect"] = r.matching_defect;
        gates.add("matching_defect", r.matching_defect, 1e-9);
    }
    gates.add("split_residual", r.max_residual, cfg.tol.split * 10.0);
    add_validation_gates(gates, r.report, cfg.tol.validation);
    maybe_mesh(cfg, r.mesh, out_dir, summary);
    return summary;
}

json run_classify(const PipelineConfig& cfg, Gates& gates, Stopwatch& sw) {
    const auto out = sw.time("classify", [&] {
        return stage("realforms", [&] { return classify_involutions(cfg.family, cfg.relation); });
    });
    json list = json::array();
    for (const auto& c : out) {
        json defects = json::object();
        for (const auto& [name, v] : constraint_defects(c).entries) defects[name] = v;
        list.push_back({{"matrix", mjson(c.matrix)}, {"defects", defects}});
    }
    gates.add_flag("nonempty", !out.empty());
    return {{"family", family_name(cfg.family)}, {"relation", relation_name(cfg.relation)}, {"canonical", list}};
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& out_dir) {
    PipelineResult res;
    res.timings = json::object();
    Stopwatch sw(res.timings);
    Gates gates;
    json body;
    switch (cfg.mode) {
        case Mode::Solve: body = run_solve(cfg, out_dir, gates, sw); break;
        case Mode::LaxCheck: body = run_lax_check(cfg, gates, sw); break;
        case Mode::Integrate: body = run_integrate(cfg, out_dir, gates, sw); break;
        case Mode::Dpw: body = run_dpw(cfg, out_dir, gates, sw); break;
        case Mode::Classify: body = run_classify(cfg, gates, sw); break;
    }
    res.summary = {{"mode", mode_name(cfg.mode)}, {"result", body}, {"gates", gates.items}, {"pass", gates.pass}};
    if (cfg.mode != Mode::Classify) {
        res.summary["geometry"] = tag_name(cfg.tag);
        res.summary["grid"] = {{"origin", {cfg.grid.a0, cfg.grid.b0}},
                               {"spacing", {cfg.grid.ha, cfg.grid.hb}},
                               {"dims", {cfg.grid.na, cfg.grid.nb}}};
    }
    res.exit_code = gates.pass ? 0 : 1;
    write_atomic(join(out_dir, cfg.output.summary), dump_json(res.summary));
    const std::filesystem::path sp(cfg.output.summary);
    write_atomic(join(out_dir, (sp.parent_path() / "timings.json").string()), dump_json(res.timings));
    return res;
}

}  // namespace toda
