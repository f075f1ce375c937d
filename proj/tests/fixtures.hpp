#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "bisdp/dataset.hpp"

namespace fixture {

#ifndef BISDP_SOURCE_DIR
#define BISDP_SOURCE_DIR "."
#endif

// a1a training file: $BISDP_A1A, else <source>/data/a1a(.gz).
inline std::optional<std::string> a1a_path() {
  namespace fs = std::filesystem;
  if (const char* env = std::getenv("BISDP_A1A"); env && *env) {
    if (fs::exists(env)) return std::string(env);
    return std::nullopt;
  }
  for (const char* name : {"/data/a1a", "/data/a1a.gz"}) {
    const std::string p = std::string(BISDP_SOURCE_DIR) + name;
    if (fs::exists(p)) return p;
  }
  return std::nullopt;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("bisdp-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Two classes pointing in different directions of the positive orthant, with
// sparse Gaussian noise. Works for cosine and Euclidean neighborhoods.
inline bisdp::LabeledDataset two_clusters(std::size_t n, std::size_t d, std::uint64_t seed,
                                          double noise = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, noise);
  std::bernoulli_distribution keep(0.5);
  bisdp::LabeledDataset data;
  data.d = d;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i % 2 == 0 ? 1 : -1;
    bisdp::SparseRow row;
    for (std::size_t c = 0; c < d; ++c) {
      const bool home = (c < d / 2) == (label == 1);
      double v = home ? 1.0 + gauss(rng) : (keep(rng) ? gauss(rng) : 0.0);
      if (v != 0.0) row.push_back({c, v});
    }
    data.rows.push_back(std::move(row));
    data.labels.push_back(label);
  }
  return data;
}

inline void write_dataset(const bisdp::LabeledDataset& data, const std::string& path) {
  std::ofstream out(path);
  bisdp::write_libsvm(out, data);
}

}  // namespace fixture
