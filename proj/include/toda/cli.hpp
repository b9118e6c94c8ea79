#pragma once

#include "toda/factorization.hpp"
#include "toda/pde.hpp"
#include "toda/realforms.hpp"

#include <json.hpp>

#include <string>

namespace toda {

enum class Mode { Solve, LaxCheck, Integrate, Dpw, Classify };

const char* mode_name(Mode m);
Mode mode_from_name(const std::string& name);  // throws ConfigError naming "mode"

struct Tolerances {
    double residual = 1e-8;     // PDE certificate and frame precondition
    double path = 1e-6;         // frame path independence
    double validation = 1e-5;   // surface identities
    double symmetry = 1e-12;    // lax-check defects
    double split = 1e-11;       // DPW reassembly
};

struct OutputSpec {
    std::string summary = "summary.json";
    std::string mesh;              // empty: no mesh
    std::string mesh_format = "obj";
    bool chart = false;            // affine chart projection of lifts
    std::string csv;               // empty: no residual table
};

struct PipelineConfig {
    Mode mode = Mode::Integrate;
    Tag tag = Tag::AffIndef;
    Grid grid;
    nlohmann::json data = nlohmann::json::object();
    nlohmann::json potential = nlohmann::json::object();
    std::vector<cd> lambdas = {1.0};
    Tolerances tol;
    OutputSpec output;
    Family family = Family::Conjugation;
    Relation relation = Relation::Commuting;
    int trunc = 8;
};

/// Validates and converts a parsed config; `mode` overrides the file's mode when set.
PipelineConfig parse_config(const nlohmann::json& j, const std::optional<Mode>& mode = std::nullopt);

struct PipelineResult {
    int exit_code = 0;
    nlohmann::json summary;
    nlohmann::json timings;
};

/// Runs the pipeline and writes artifacts under out_dir.
PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& out_dir);

enum class MeshFormat { OBJ, CSV };

/// Atomic write; throws UnsupportedRepresentation for lifts as OBJ without chart projection,
/// or for chart projections through f3 = 0 (indices attached).
void export_mesh(const SurfaceMesh& mesh, MeshFormat format, const std::string& path, bool chart = false);

/// JSON text with sorted keys, two-space indent, floats as %.17g and non-finite values as null.
std::string dump_json(const nlohmann::json& j);

void write_atomic(const std::string& path, const std::string& content);

}  // namespace toda
