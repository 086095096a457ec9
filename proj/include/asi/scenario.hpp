#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "asi/inversion.hpp"

namespace asi {

struct MeshSpec {
    Rect domain{0.0, 0.0, 1.0, 1.0};
    int nx = 1;
    int ny = 1;
    int refine = 0;

    Mesh build() const;
    Mesh build_refined() const;  // one extra refinement level (observation mesh)
};

struct SourceSpec {
    Point center;
    double width = 0.0;  // <= 0 means the default of twice the mesh diameter
    double amplitude = 1.0;
};

struct DecomposeSpec {
    int modes = 8;
    int extra_modes = 1;  // eigenvalues tabulated past `modes` (divergence echo)
    int refinements = 1;  // rows of the eigenvalue-vs-refinement table
    double delta_factor = 2.0;
    std::optional<Rect> v_rect;
};

// Full description of a runnable scenario; round-trips through its canonical
// text form.
struct ScenarioConfig {
    std::string name = "scenario";
    MeshSpec mesh;
    Medium medium;
    std::optional<std::string> raster_file;
    WeightSpec weight;
    std::vector<SourceSpec> sources;
    std::vector<Side> gamma{Side::Bottom, Side::Right, Side::Top, Side::Left};
    AsiConfig asi;
    double noise = 0.0;
    std::optional<std::uint64_t> seed;
    double initial_constant = 1.0;
    std::string output_dir = "out";
    std::optional<std::string> observations_dir;
    DecomposeSpec decompose;
};

// Parsing throws ConfigError naming the offending field. `base_dir` resolves
// relative raster file paths.
ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");
std::string emit_config(const ScenarioConfig& cfg);
ScenarioConfig load_config(const std::filesystem::path& path);

// Built-in scenarios: "decomposition" (multi-inclusion medium on a 1.5 x 1
// domain), "five_inclusion" (inversion benchmark on the unit square),
// "constant" (homogeneous sanity case).
ScenarioConfig preset(const std::string& name);
std::vector<std::string> preset_names();

// Boundary edges belonging to the listed sides, and sources with defaulted
// widths resolved against the mesh.
std::vector<int> side_edges(const Mesh& mesh, const std::vector<Side>& sides);
std::vector<GaussianSource> resolve_sources(const ScenarioConfig& cfg, const Mesh& mesh);

// Synthetic observations: exact-medium solves on the once-refined mesh,
// restricted to the observation nodes of the inversion mesh, plus seeded
// complex noise scaled per source to the configured relative level.
std::vector<ObservationSet> synthesize_observations(const ScenarioConfig& cfg);

void write_observations(const std::filesystem::path& dir, const Mesh& mesh,
                        const std::vector<ObservationSet>& obs);
std::vector<ObservationSet> read_observations(const std::filesystem::path& dir,
                                              const ScenarioConfig& cfg, const Mesh& mesh);

// Plain-text emitters: nodal fields as x,y,re,im with a sidecar descriptor;
// history as one row per outer iteration.
void write_field(const std::filesystem::path& path, const Mesh& mesh, const VecC& field);
void write_field(const std::filesystem::path& path, const Mesh& mesh, const VecR& field);
void write_history(const std::filesystem::path& path, const std::vector<HistoryRow>& history);

void write_snapshot(const std::filesystem::path& path, const AsiState& state);
AsiState read_snapshot(const std::filesystem::path& path);

std::uint64_t config_hash(const std::string& canonical_text);
void write_manifest(const std::filesystem::path& dir, const ScenarioConfig& cfg,
                    const std::string& command);

// Command drivers used by the executable; they create `out` and write the
// documented artifacts, throwing ConfigError / NumericalError on failure.
void run_observe(const ScenarioConfig& cfg, const std::filesystem::path& out);
void run_decomposition_study(const ScenarioConfig& cfg, const std::filesystem::path& out);
void run_inversion(const ScenarioConfig& cfg, const std::filesystem::path& out,
                   const std::optional<std::filesystem::path>& resume_snapshot = {});
void run_verify(const ScenarioConfig& cfg, const std::filesystem::path& out);

}  // namespace asi
