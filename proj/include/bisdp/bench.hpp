#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bisdp/solver.hpp"

namespace bisdp {

enum class ProblemKind { kNpkl, kCmvu };
enum class SolverKind { kAagd, kAgd, kOracle };
enum class TraceFormat { kCsv, kJson };

ProblemKind parse_problem_kind(const std::string& s);
SolverKind parse_solver_kind(const std::string& s);
std::string to_string(ProblemKind k);
std::string to_string(SolverKind k);

struct ExperimentConfig {
  std::string data_path;
  std::string data_format = "auto";  // auto | libsvm | csv
  ProblemKind problem = ProblemKind::kNpkl;
  SolverKind solver = SolverKind::kAagd;
  /// Defaults to 10 for NPKL and 1 for CMVU.
  std::optional<double> lambda;
  std::size_t rank = 10;
  std::size_t pairs_must = 1204;
  std::size_t pairs_cannot = 1204;
  std::size_t knn = 5;
  double neighbor_fraction = 0.01;
  double tol = 1e-6;
  std::size_t max_iters = 2000;
  std::vector<std::uint64_t> seeds{0};
  /// Per-seed paths: "{seed}" is substituted; otherwise ".seed<k>" is inserted
  /// before the extension when more than one seed runs.
  std::string trace_out;
  std::string summary_out;
  std::string embedding_out;
  std::size_t max_rows = 0;
  std::size_t dimension = 0;
  std::size_t restarts = 10;
  /// Number of k-means clusters; 0 uses the number of classes.
  std::size_t clusters = 0;

  double effective_lambda() const;
  /// Throws std::invalid_argument on the first invalid field.
  void validate() const;
};

/// Strict JSON form: unknown keys and wrong types are rejected.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<TraceRecord> trace;
  std::string termination;
  double final_objective = 0.0;
  double final_objective_f = 0.0;
  double final_residual = 0.0;
  double relative_residual = 0.0;
  double rand_index = 0.0;
  double wall_clock_s = 0.0;
};

struct ExperimentSummary {
  ExperimentConfig config;
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<SeedRun> runs;
  double rand_index_mean = 0.0;
  double rand_index_std = 0.0;

  nlohmann::json to_json() const;
};

/// Parses, builds the problem, solves once per seed, evaluates with kernel
/// k-means and writes every requested output file.
ExperimentSummary run_experiment(const ExperimentConfig& config);

/// Exit-code wrappers: 0 on success; errors propagate as exceptions.
int run_npkl(const ExperimentConfig& config);
int run_cmvu(const ExperimentConfig& config);

void emit_trace(const std::vector<TraceRecord>& records, const std::string& path,
                TraceFormat format = TraceFormat::kCsv);
std::vector<TraceRecord> read_trace_csv(const std::string& path);
std::string trace_csv(const std::vector<TraceRecord>& records);

/// Applies the {seed} / ".seed<k>" rule and the output-directory override.
std::string per_seed_path(const std::string& pattern, std::uint64_t seed, bool multiple);
/// Relative paths are resolved against $BISDP_OUTPUT_DIR when it is set.
std::string resolve_output_path(const std::string& path);

}  // namespace bisdp
