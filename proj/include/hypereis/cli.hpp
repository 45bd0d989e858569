#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypereis/analysis.hpp"

namespace hypereis::cli {

using analysis::FuchsianGroup;
using analysis::PointH;
using analysis::TruncationPolicy;
using hypgeom::Matrix2;

// Numeric fields are decimal strings ("0.5", "1e-3"); JSON numbers are accepted too.
struct GroupConfig {
    std::string preset;                // empty when generators are given
    std::vector<double> params;
    std::vector<Matrix2> generators;   // explicit matrices (a, b, c, d)
    bool assert_discrete = false;
    std::vector<double> delta_radii;   // empty: chosen from the rank
    double counting_q = 2.0;
    PointH base_point = PointH::make(0.1, 1.1);
};

struct SeriesConfig {
    std::string family = "omega";
    int gen = 0;
    int q = 0;
    std::vector<cplx> s{cplx{1.0}};
    std::optional<double> b;  // Patterson boundary point; unset means infinity
};

struct OutputConfig {
    std::string dir = ".";
    std::string format = "csv";  // csv | json | both
    std::string stem = "eval";
};

struct VerifyConfig {
    std::vector<std::string> checks;  // empty: all
    std::optional<double> tolerance;
};

// One member of a user-supplied degenerating family: the generators at length l.
struct FamilyMember {
    double l = 0.0;
    std::vector<Matrix2> generators;
};

struct DegenerateConfig {
    std::string family = "elementary";  // elementary | custom
    std::vector<int> q{1};
    cplx s{2.0};
    std::vector<double> l_grid{0.4, 0.2, 0.1, 0.05};
    analysis::DegenerationGrid grid;
    // custom families
    std::vector<FamilyMember> members;
    int pinched_gen = 0;
    std::vector<Matrix2> limit_generators;
    int limit_cusp_gen = 0;
};

struct JobConfig {
    std::optional<GroupConfig> group;
    SeriesConfig series;
    series::GridSpec grid;
    TruncationPolicy truncation;
    OutputConfig output;
    VerifyConfig verify;
    DegenerateConfig degenerate;
};

// Throws ConfigError on malformed input or unknown keys.
JobConfig parse_config(const std::string& text);
JobConfig load_config(const std::string& path);

// Canonical form; parse_config(to_json(c).dump()) reproduces c.
nlohmann::ordered_json to_json(const JobConfig& c);

FuchsianGroup build_group(const GroupConfig& g);

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // non-convergence or a failed check
inline constexpr int kExitConfig = 2;   // configuration or domain error

inline constexpr const char* kGroupSchema = "hypereis.group.v1";
inline constexpr const char* kDegenerateSchema = "hypereis.degenerate.v1";
inline constexpr const char* kEvalManifestSchema = "hypereis.eval.v1";

struct RunOptions {
    std::string command;  // group | eval | verify | degenerate
    std::string config_path;
    std::optional<std::string> out;
    int threads = 1;
    std::vector<std::string> checks;
};

// Output directory: --out, then HYPEREIS_OUTPUT_DIR, then the config's output.dir.
std::string resolve_output_dir(const RunOptions& opt, const JobConfig& cfg);

// Runs one subcommand and maps errors to exit codes; messages go to err.
int run(const RunOptions& opt, std::ostream& out, std::ostream& err);

// Parses argv-style arguments (without the program name) and runs.
int run_args(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hypereis::cli
