#pragma once

#include "zngauge/continuum.hpp"
#include "zngauge/criticality.hpp"
#include "zngauge/dmrg_engine.hpp"
#include "zngauge/ed_engine.hpp"
#include "zngauge/scan_table.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace zngauge {

/// Invalid configuration; `key` is the dotted path of the offending entry,
/// e.g. "grid.m" or "model.cases[2].phi".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string &message);
    const std::string &key() const { return key_; }

private:
    std::string key_;
};

/// One (n, t, phi) model with its boundary sector. An unset k0 picks the
/// first label of smallest |Etilde|.
struct ModelCase {
    int n = 3;
    double t = 0.0;
    double phi = 0.0;
    std::optional<int> k0;
    std::optional<double> m_center;  ///< origin of a relative mass grid

    int resolved_k0() const;
    friend bool operator==(const ModelCase &, const ModelCase &) = default;
};

/// Masses either listed or as an inclusive linear range; a relative grid is
/// shifted by each case's m_center.
struct MassGrid {
    std::vector<double> values;
    struct Range {
        double from = 0.0;
        double to = 0.0;
        int count = 0;
        friend bool operator==(const Range &, const Range &) = default;
    };
    std::optional<Range> range;
    bool relative = false;

    std::vector<double> masses(const ModelCase &model) const;
    friend bool operator==(const MassGrid &, const MassGrid &) = default;
};

struct GridBlock {
    MassGrid m;
    std::vector<int> L;
    friend bool operator==(const GridBlock &, const GridBlock &) = default;
};

enum class EngineChoice { ed, dmrg, automatic };

struct SolverBlock {
    EngineChoice engine = EngineChoice::automatic;
    std::vector<int> chi{512};
    int levels = 3;
    double cutoff = 1e-10;
    int max_sweeps = 40;
    int min_sweeps = 2;
    double energy_tol = 1e-9;
    double truncation_ceiling = 1e-6;
    int krylov_size = 24;
    long local_matvecs = 400;
    double ed_tol = 1e-10;
    std::size_t ed_threshold = 200000;  ///< largest sector handled by ED under engine=auto
    std::uint64_t seed = 0x5eed2024;
    bool both_seeds = false;            ///< DMRG ground state from both seed patterns, keep the lower

    friend bool operator==(const SolverBlock &, const SolverBlock &) = default;
};

struct AnalysisBlock {
    bool collapse = false;
    double beta = 0.125;
    double nu = 1.0;
    double window = 0.0;
    int min_window_points = 5;

    bool critical_followup = false;  ///< solve at the fitted m_c for followup_L
    std::vector<int> followup_L;

    bool crossover = false;
    int edge_margin = 0;

    bool critical_line = false;  ///< m_c(t) per n from the collapses and critical_line_inputs
    bool include_t0 = false;     ///< add the analytic t = 0 mass as a point
    double critical_sigma = 0.025;
    struct LineInput {
        int n = 0;
        std::string file;
        friend bool operator==(const LineInput &, const LineInput &) = default;
    };
    std::vector<LineInput> critical_line_inputs;
    std::string reference_table;  ///< Table-I-like CSV to compare against

    bool extrapolate = false;
    std::string extrapolate_input;  ///< Table-I-like CSV; empty uses this run's critical-line report
    std::optional<double> fixed_b;
    bool include_n2 = false;

    friend bool operator==(const AnalysisBlock &, const AnalysisBlock &) = default;
};

struct OutputBlock {
    std::string directory = "zngauge-out";
    bool profiles = true;
    friend bool operator==(const OutputBlock &, const OutputBlock &) = default;
};

struct ExperimentConfig {
    std::vector<ModelCase> cases;  ///< empty for analysis-only runs
    GridBlock grid;
    SolverBlock solver;
    AnalysisBlock analysis;
    OutputBlock output;
    int workers = 1;
    std::filesystem::path base_dir;  ///< relative paths resolve here (not serialized)

    /// Parses and validates; throws ConfigError.
    static ExperimentConfig from_json_text(const std::string &text, std::filesystem::path base_dir = {});
    static ExperimentConfig load(const std::filesystem::path &file);
    /// Canonical form with every default spelled out.
    std::string to_json_text() const;
    /// Re-checks invariants after programmatic edits.
    void validate() const;
    std::filesystem::path resolve(const std::string &path) const;
    std::string hash() const;

    friend bool operator==(const ExperimentConfig &a, const ExperimentConfig &b) {
        return a.cases == b.cases && a.grid == b.grid && a.solver == b.solver && a.analysis == b.analysis && a.output == b.output &&
               a.workers == b.workers;
    }
};

std::string code_version();
/// 64-bit FNV-1a as 16 hex digits.
std::string fnv1a_hex(const std::string &text);

/// Number of half-filled chain states in one boundary sector, binomial(2L, L).
std::size_t sector_dimension(int L);
/// "ed" or "dmrg" for one size.
std::string choose_engine(const SolverBlock &solver, int L);

struct ScanPoint {
    std::size_t case_index = 0;
    ModelCase model;
    int L = 0;
    int chi = 0;  ///< 0 for ED
    double m = 0.0;
    std::string engine;
    std::string provenance;
};

/// Identifies everything that fixes the numbers of one row.
std::string point_provenance(const ModelCase &model, const SolverBlock &solver, const std::string &engine);
std::vector<ScanPoint> plan_scan(const ExperimentConfig &config);

struct PointResult {
    ScanRow row;
    EntropyProfile profile;
    std::vector<double> energies;
    long iterations = 0;  ///< sweeps (DMRG) or matvecs (ED), summed over levels
    double max_truncation = 0.0;
    double leakage = 0.0;
    double seconds = 0.0;
    std::string error;  ///< non-empty when the solver threw; the row is marked unconverged
};

PointResult solve_point(const ScanPoint &point, const SolverBlock &solver);

struct RunRecord {
    ScanRow key;
    std::string engine;
    bool converged = false;
    long iterations = 0;
    double max_truncation = 0.0;
    double leakage = 0.0;
    double seconds = 0.0;
    std::uint64_t seed = 0;
    std::string error;
};

struct RunManifest {
    std::string config_hash;
    std::string code_version;
    std::string config_json;
    double wall_seconds = 0.0;
    long solver_invocations = 0;
    std::vector<RunRecord> records;

    std::string to_json_text() const;
    static RunManifest from_json_text(const std::string &text);
};

struct ScanOutcome {
    ScanTable table;
    RunManifest manifest;
    bool all_converged = false;
};

using ProgressFn = std::function<void(const PointResult &, std::size_t done, std::size_t total)>;

/// Solves every planned point not already present in `directory`/scan.csv
/// with the same provenance, persisting after each point. A stored row with
/// the same key but another provenance is an error, never a silent merge.
ScanOutcome run_scan(const ExperimentConfig &config, const ProgressFn &progress = {});

/// Scan rows of one case at the largest chi per (L, m).
ScanTable case_table(const ScanTable &table, const ModelCase &model);
/// File holding the entropy profiles of one case.
std::string profile_file_name(const ModelCase &model);

struct CriticalLineRow {
    int n = 0;
    FitResult fit;
    std::vector<CriticalPoint> points;
};

struct AnalysisReport {
    std::string json;  ///< full report as written to analysis.json
    std::vector<CriticalLineRow> critical_lines;
    bool all_converged = true;
};

/// Runs the analysis block over the tables already in the output directory.
/// Throws ConfigError naming the key that would produce a missing input.
AnalysisReport run_analysis(const ExperimentConfig &config, const ProgressFn &progress = {});

/// Scan, then analysis.
AnalysisReport run_pipeline(const ExperimentConfig &config, const ProgressFn &progress = {});

/// Table-I-like CSV: n,m0,m0_err,alpha,alpha_err,beta,beta_err.
struct LineCoefficients {
    int n = 0;
    double m0 = 0.0, m0_err = 0.0, alpha = 0.0, alpha_err = 0.0, beta = 0.0, beta_err = 0.0;
};
std::vector<LineCoefficients> read_line_table_csv(std::istream &is);
void write_line_table_csv(std::ostream &os, std::span<const LineCoefficients> rows);

}  // namespace zngauge
