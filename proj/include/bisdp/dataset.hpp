#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "bisdp/cmvu.hpp"
#include "bisdp/linalg.hpp"
#include "bisdp/npkl.hpp"

namespace bisdp {

struct SparseFeature {
  std::size_t index;  // zero-based
  double value;
};

using SparseRow = std::vector<SparseFeature>;

struct LabeledDataset {
  std::size_t d = 0;
  std::vector<SparseRow> rows;
  std::vector<int> labels;

  std::size_t n() const { return rows.size(); }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct ParseOptions {
  /// Declared feature dimension. 0 infers it from the largest index seen;
  /// otherwise indices above it are rejected.
  std::size_t dimension = 0;
  /// Stop after this many data rows (0 = all).
  std::size_t max_rows = 0;
};

/// "<label> <idx>:<val> ..." per line, one-based strictly increasing indices.
LabeledDataset parse_libsvm(std::istream& in, const ParseOptions& opts = {});
/// Reads plain or gzip-compressed files.
LabeledDataset parse_libsvm_file(const std::string& path, const ParseOptions& opts = {});
void write_libsvm(std::ostream& out, const LabeledDataset& data);

/// "<label>,<x1>,<x2>,..." per line; a non-numeric first line is a header.
LabeledDataset parse_csv_file(const std::string& path, const ParseOptions& opts = {});

/// Uniformly samples distinct unordered same-label (target 1) and
/// different-label (target 0) pairs without replacement.
ConstraintSet sample_pair_constraints(const std::vector<int>& labels, std::size_t m_must,
                                      std::size_t m_cannot, std::uint64_t seed);

/// Unnormalized Laplacian D - W of the symmetrized k-NN graph under cosine
/// similarity, unit edge weights. Ties go to the lower index; all-zero rows
/// have similarity 0 to everything.
SparseSymmetric build_knn_laplacian(const LabeledDataset& data, std::size_t k = 5);

/// ceil(fraction * n) nearest neighbors of each point by squared Euclidean
/// distance, closed under symmetry.
NeighborSet build_neighbor_set(const LabeledDataset& data, double fraction);

/// Column-centered one-hot label indicator; columns follow first appearance.
Factor build_centered_label_factor(const std::vector<int>& labels);

/// Exact squared Euclidean distance between sparse rows.
double squared_distance(const SparseRow& a, const SparseRow& b);

}  // namespace bisdp
