#include "bisdp/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bisdp/baselines.hpp"
#include "bisdp/cluster.hpp"
#include "bisdp/cmvu.hpp"
#include "bisdp/dataset.hpp"
#include "bisdp/npkl.hpp"

namespace bisdp {

ProblemKind parse_problem_kind(const std::string& s) {
  if (s == "npkl") return ProblemKind::kNpkl;
  if (s == "cmvu") return ProblemKind::kCmvu;
  throw std::invalid_argument("unknown problem '" + s + "' (expected npkl or cmvu)");
}

SolverKind parse_solver_kind(const std::string& s) {
  if (s == "aagd") return SolverKind::kAagd;
  if (s == "agd") return SolverKind::kAgd;
  if (s == "oracle") return SolverKind::kOracle;
  throw std::invalid_argument("unknown solver '" + s + "' (expected aagd, agd or oracle)");
}

std::string to_string(ProblemKind k) { return k == ProblemKind::kNpkl ? "npkl" : "cmvu"; }

std::string to_string(SolverKind k) {
  switch (k) {
    case SolverKind::kAagd: return "aagd";
    case SolverKind::kAgd: return "agd";
    case SolverKind::kOracle: return "oracle";
  }
  return "unknown";
}

double ExperimentConfig::effective_lambda() const {
  if (lambda) return *lambda;
  return problem == ProblemKind::kNpkl ? 10.0 : 1.0;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
  if (data_path.empty()) fail("data path is required");
  if (data_format != "auto" && data_format != "libsvm" && data_format != "csv") {
    fail("data format must be auto, libsvm or csv");
  }
  if (!(effective_lambda() >= 0.0) || !std::isfinite(effective_lambda())) fail("lambda must be >= 0");
  if (rank == 0) fail("rank must be >= 1");
  if (knn == 0) fail("knn must be >= 1");
  if (!(neighbor_fraction > 0.0 && neighbor_fraction < 1.0)) {
    fail("neighbor fraction must be in (0, 1)");
  }
  if (!(tol > 0.0)) fail("tol must be > 0");
  if (max_iters == 0) fail("max iters must be >= 1");
  if (seeds.empty()) fail("at least one seed is required");
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    for (std::size_t j = i + 1; j < seeds.size(); ++j) {
      if (seeds[i] == seeds[j]) fail("duplicate seed " + std::to_string(seeds[i]));
    }
  }
  if (restarts == 0) fail("restarts must be >= 1");
  if (problem == ProblemKind::kNpkl && pairs_must + pairs_cannot == 0) {
    fail("at least one pair constraint is required");
  }
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  ExperimentConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "data") c.data_path = value.get<std::string>();
      else if (key == "format") c.data_format = value.get<std::string>();
      else if (key == "problem") c.problem = parse_problem_kind(value.get<std::string>());
      else if (key == "solver") c.solver = parse_solver_kind(value.get<std::string>());
      else if (key == "lambda") c.lambda = value.get<double>();
      else if (key == "rank") c.rank = value.get<std::size_t>();
      else if (key == "pairs_must") c.pairs_must = value.get<std::size_t>();
      else if (key == "pairs_cannot") c.pairs_cannot = value.get<std::size_t>();
      else if (key == "knn") c.knn = value.get<std::size_t>();
      else if (key == "neighbor_fraction") c.neighbor_fraction = value.get<double>();
      else if (key == "tol") c.tol = value.get<double>();
      else if (key == "max_iters") c.max_iters = value.get<std::size_t>();
      else if (key == "seeds") c.seeds = value.get<std::vector<std::uint64_t>>();
      else if (key == "trace_out") c.trace_out = value.get<std::string>();
      else if (key == "summary_out") c.summary_out = value.get<std::string>();
      else if (key == "embedding_out") c.embedding_out = value.get<std::string>();
      else if (key == "max_rows") c.max_rows = value.get<std::size_t>();
      else if (key == "dimension") c.dimension = value.get<std::size_t>();
      else if (key == "restarts") c.restarts = value.get<std::size_t>();
      else if (key == "clusters") c.clusters = value.get<std::size_t>();
      else throw std::invalid_argument("config: unknown key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("config: bad value for '" + key + "': " + e.what());
    }
  }
  return c;
}

nlohmann::json ExperimentSummary::to_json() const {
  using nlohmann::json;
  json runs_json = json::array();
  for (const SeedRun& r : runs) {
    runs_json.push_back({{"seed", r.seed},
                         {"iterations", r.trace.size()},
                         {"termination", r.termination},
                         {"final_objective", r.final_objective},
                         {"final_objective_f", r.final_objective_f},
                         {"final_residual", r.final_residual},
                         {"relative_residual", r.relative_residual},
                         {"rand_index", r.rand_index},
                         {"wall_clock_s", r.wall_clock_s}});
  }
  double wall = 0.0;
  for (const SeedRun& r : runs) wall += r.wall_clock_s;
  const ExperimentConfig& c = config;
  return {{"problem", to_string(c.problem)},
          {"solver", to_string(c.solver)},
          {"data", c.data_path},
          {"n", n},
          {"d", d},
          {"lambda", c.effective_lambda()},
          {"rank", c.rank},
          {"pairs_must", c.pairs_must},
          {"pairs_cannot", c.pairs_cannot},
          {"knn", c.knn},
          {"neighbor_fraction", c.neighbor_fraction},
          {"tol", c.tol},
          {"max_iters", c.max_iters},
          {"restarts", c.restarts},
          {"seeds", c.seeds},
          {"runs", runs_json},
          {"rand_index", {{"mean", rand_index_mean}, {"std", rand_index_std}}},
          {"wall_clock_s", {{"total", wall}, {"mean", wall / static_cast<double>(runs.size())}}}};
}

std::string resolve_output_path(const std::string& path) {
  namespace fs = std::filesystem;
  const char* dir = std::getenv("BISDP_OUTPUT_DIR");
  if (dir == nullptr || *dir == '\0' || fs::path(path).is_absolute()) return path;
  return (fs::path(dir) / path).string();
}

std::string per_seed_path(const std::string& pattern, std::uint64_t seed, bool multiple) {
  std::string out = pattern;
  const std::string token = "{seed}";
  if (const auto pos = out.find(token); pos != std::string::npos) {
    out.replace(pos, token.size(), std::to_string(seed));
  } else if (multiple) {
    std::filesystem::path p(out);
    const std::string stem = p.stem().string() + ".seed" + std::to_string(seed);
    p.replace_filename(stem + p.extension().string());
    out = p.string();
  }
  return resolve_output_path(out);
}

namespace {

std::ofstream open_for_write(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

void finish_write(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw std::runtime_error("error writing '" + path + "'");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* kTraceHeader = "iter,objective_F,objective_f,residual,gamma,elapsed_s";

}  // namespace

std::string trace_csv(const std::vector<TraceRecord>& records) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const TraceRecord& r : records) {
    out += std::to_string(r.iter) + ',' + format_double(r.objective_F) + ',' +
           format_double(r.objective_f) + ',' + format_double(r.residual) + ',' +
           format_double(r.gamma) + ',' + format_double(r.elapsed) + '\n';
  }
  return out;
}

void emit_trace(const std::vector<TraceRecord>& records, const std::string& path,
                TraceFormat format) {
  if (records.empty()) throw std::invalid_argument("emit_trace: no records");
  std::ofstream out = open_for_write(path);
  if (format == TraceFormat::kCsv) {
    out << trace_csv(records);
  } else {
    nlohmann::json arr = nlohmann::json::array();
    for (const TraceRecord& r : records) {
      arr.push_back({{"iter", r.iter},
                     {"objective_F", r.objective_F},
                     {"objective_f", r.objective_f},
                     {"residual", r.residual},
                     {"gamma", r.gamma},
                     {"elapsed_s", r.elapsed}});
    }
    out << arr.dump(2) << '\n';
  }
  finish_write(out, path);
}

std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw std::runtime_error("read_trace_csv: unexpected header in '" + path + "'");
  }
  std::vector<TraceRecord> records;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) {
      throw std::runtime_error("read_trace_csv: line " + std::to_string(lineno) +
                               " has " + std::to_string(cells.size()) + " fields");
    }
    try {
      TraceRecord r;
      r.iter = std::stoull(cells[0]);
      r.objective_F = std::stod(cells[1]);
      r.objective_f = std::stod(cells[2]);
      r.residual = std::stod(cells[3]);
      r.gamma = std::stod(cells[4]);
      r.elapsed = std::stod(cells[5]);
      records.push_back(r);
    } catch (const std::logic_error&) {
      throw std::runtime_error("read_trace_csv: malformed number on line " +
                               std::to_string(lineno));
    }
  }
  return records;
}

namespace {

LabeledDataset load(const ExperimentConfig& c) {
  ParseOptions opts;
  opts.dimension = c.dimension;
  opts.max_rows = c.max_rows;
  std::string format = c.data_format;
  if (format == "auto") {
    const std::string& p = c.data_path;
    auto ends_with = [&](const std::string& s) {
      return p.size() >= s.size() && p.compare(p.size() - s.size(), s.size(), s) == 0;
    };
    format = ends_with(".csv") || ends_with(".csv.gz") ? "csv" : "libsvm";
  }
  LabeledDataset data = format == "csv" ? parse_csv_file(c.data_path, opts)
                                        : parse_libsvm_file(c.data_path, opts);
  if (data.n() < 2) throw std::runtime_error("dataset has fewer than two rows");
  return data;
}

// Top-`rank` factor of a PSD matrix, for reporting oracle embeddings.
Factor psd_factor(const Eigen::MatrixXd& Z, std::size_t rank) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Z);
  const Eigen::Index n = Z.rows();
  const Eigen::Index r = std::min<Eigen::Index>(static_cast<Eigen::Index>(rank), n);
  Factor F(n, r);
  for (Eigen::Index c = 0; c < r; ++c) {
    const Eigen::Index src = n - 1 - c;
    F.col(c) = eig.eigenvectors().col(src) * std::sqrt(std::max(0.0, eig.eigenvalues()[src]));
  }
  return F;
}

struct Solved {
  std::vector<TraceRecord> trace;
  std::string termination;
  Factor X, Y;
  std::optional<Eigen::MatrixXd> dense;
  double seconds = 0.0;
};

template <typename Problem>
Solved solve(const Problem& problem, const ExperimentConfig& c, std::uint64_t seed) {
  SolverConfig sc;
  sc.rank = c.rank;
  sc.max_iters = c.max_iters;
  sc.rel_obj_tol = c.tol;
  sc.seed = seed;
  Solved out;
  const auto start = std::chrono::steady_clock::now();
  if (c.solver == SolverKind::kOracle) {
    OracleResult r = psd_pg_oracle(problem, OracleStepRule{}, c.tol, c.max_iters);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.termination = r.converged ? "relative_change" : "max_iterations";
    out.trace = std::move(r.trace);
    out.Y = psd_factor(r.Z, c.rank);
    out.X = out.Y;
    out.dense = std::move(r.Z);
    return out;
  }
  SolveResult r = c.solver == SolverKind::kAagd ? aagd_solve(problem, sc) : agd_xx_solve(problem, sc);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.termination = to_string(r.termination);
  out.trace = std::move(r.trace);
  out.X = std::move(r.factors.X);
  out.Y = std::move(r.factors.Y);
  return out;
}

void write_embedding(const Factor& F, const std::string& path) {
  std::ofstream out = open_for_write(path);
  for (Eigen::Index i = 0; i < F.rows(); ++i) {
    for (Eigen::Index j = 0; j < F.cols(); ++j) {
      if (j) out << ',';
      out << format_double(F(i, j));
    }
    out << '\n';
  }
  finish_write(out, path);
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& config) {
  config.validate();
  const LabeledDataset data = load(config);
  const Partition truth = partition_from_labels(data.labels);
  const std::size_t k = config.clusters != 0 ? config.clusters : truth.cluster_count();
  const double lambda = config.effective_lambda();

  ExperimentSummary summary;
  summary.config = config;
  summary.n = data.n();
  summary.d = data.d;

  std::optional<SparseSymmetric> laplacian;
  std::optional<NeighborSet> neighbors;
  Factor label_factor;
  if (config.problem == ProblemKind::kNpkl) {
    laplacian = build_knn_laplacian(data, config.knn);
  } else {
    neighbors = build_neighbor_set(data, config.neighbor_fraction);
    label_factor = build_centered_label_factor(data.labels);
  }

  const bool multiple = config.seeds.size() > 1;
  for (std::uint64_t seed : config.seeds) {
    Solved s;
    if (config.problem == ProblemKind::kNpkl) {
      NpklProblem problem(
          sample_pair_constraints(data.labels, config.pairs_must, config.pairs_cannot, seed),
          *laplacian, lambda);
      s = solve(problem, config, seed);
    } else {
      CmvuProblem problem(*neighbors, label_factor, lambda);
      s = solve(problem, config, seed);
    }
    if (s.trace.empty()) throw std::runtime_error("solver produced no iterations");

    KMeansOptions km;
    km.k = k;
    km.seed = seed;
    km.restarts = config.restarts;
    const KMeansResult clusters =
        s.dense ? kernel_kmeans(*s.dense, km) : kernel_kmeans_factor(s.Y, km);

    SeedRun run;
    run.seed = seed;
    run.termination = s.termination;
    run.final_objective = s.trace.back().objective_F;
    run.final_objective_f = s.trace.back().objective_f;
    run.final_residual = s.trace.back().residual;
    const double scale = s.X.squaredNorm();
    run.relative_residual = scale > 0.0 ? run.final_residual / scale : run.final_residual;
    run.rand_index = rand_index(clusters.partition, truth);
    run.wall_clock_s = s.seconds;
    run.trace = std::move(s.trace);

    if (!config.trace_out.empty()) {
      emit_trace(run.trace, per_seed_path(config.trace_out, seed, multiple));
    }
    if (!config.embedding_out.empty()) {
      write_embedding(s.Y, per_seed_path(config.embedding_out, seed, multiple));
    }
    summary.runs.push_back(std::move(run));
  }

  double mean = 0.0;
  for (const SeedRun& r : summary.runs) mean += r.rand_index;
  mean /= static_cast<double>(summary.runs.size());
  double var = 0.0;
  for (const SeedRun& r : summary.runs) var += (r.rand_index - mean) * (r.rand_index - mean);
  summary.rand_index_mean = mean;
  summary.rand_index_std =
      summary.runs.size() > 1 ? std::sqrt(var / static_cast<double>(summary.runs.size() - 1)) : 0.0;

  if (!config.summary_out.empty()) {
    const std::string path = resolve_output_path(config.summary_out);
    std::ofstream out = open_for_write(path);
    out << summary.to_json().dump(2) << '\n';
    finish_write(out, path);
  }
  return summary;
}

int run_npkl(const ExperimentConfig& config) {
  if (config.problem != ProblemKind::kNpkl) throw std::invalid_argument("run_npkl: problem is not npkl");
  run_experiment(config);
  return 0;
}

int run_cmvu(const ExperimentConfig& config) {
  if (config.problem != ProblemKind::kCmvu) throw std::invalid_argument("run_cmvu: problem is not cmvu");
  run_experiment(config);
  return 0;
}

}  // namespace bisdp
