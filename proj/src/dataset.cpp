#include "bisdp/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string_view>
#include <utility>

#include "bisdp/cluster.hpp"

namespace bisdp {

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_index(std::string_view s, std::size_t& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    out.push_back(s.substr(pos, next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

int parse_label(std::string_view token, std::size_t line) {
  double v = 0.0;
  if (!parse_double(token, v)) {
    throw ParseError(line, "malformed label '" + std::string(token) + "'");
  }
  if (v != std::floor(v) || std::abs(v) > std::numeric_limits<int>::max()) {
    throw ParseError(line, "label '" + std::string(token) + "' is not an integer");
  }
  return static_cast<int>(v);
}

std::string read_all(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) throw std::runtime_error("cannot open '" + path + "'");
  std::string data;
  char buf[1 << 16];
  int got = 0;
  while ((got = gzread(f, buf, sizeof buf)) > 0) data.append(buf, static_cast<std::size_t>(got));
  const bool failed = got < 0;
  gzclose(f);
  if (failed) throw std::runtime_error("read error on '" + path + "'");
  return data;
}

}  // namespace

LabeledDataset parse_libsvm(std::istream& in, const ParseOptions& opts) {
  LabeledDataset data;
  std::size_t max_index = 0;
  std::string raw;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    std::string_view text(raw);
    if (const auto hash = text.find('#'); hash != std::string_view::npos) {
      text = text.substr(0, hash);
    }
    const auto tokens = split_ws(text);
    if (tokens.empty()) continue;
    if (opts.max_rows != 0 && data.n() == opts.max_rows) break;

    const int label = parse_label(tokens[0], line);
    SparseRow row;
    row.reserve(tokens.size() - 1);
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const std::string_view tok = tokens[t];
      const std::size_t colon = tok.find(':');
      std::size_t index = 0;
      double value = 0.0;
      if (colon == std::string_view::npos || !parse_index(tok.substr(0, colon), index) ||
          index == 0) {
        throw ParseError(line, "malformed feature token '" + std::string(tok) + "'");
      }
      if (!parse_double(tok.substr(colon + 1), value)) {
        throw ParseError(line, "non-numeric value in '" + std::string(tok) + "'");
      }
      if (!row.empty() && index - 1 <= row.back().index) {
        throw ParseError(line, "feature indices must be strictly increasing at '" +
                                   std::string(tok) + "'");
      }
      if (opts.dimension != 0 && index > opts.dimension) {
        throw ParseError(line, "feature index " + std::to_string(index) +
                                   " exceeds dimension " + std::to_string(opts.dimension));
      }
      max_index = std::max(max_index, index);
      row.push_back({index - 1, value});
    }
    data.rows.push_back(std::move(row));
    data.labels.push_back(label);
  }
  data.d = opts.dimension != 0 ? opts.dimension : max_index;
  return data;
}

LabeledDataset parse_libsvm_file(const std::string& path, const ParseOptions& opts) {
  std::istringstream in(read_all(path));
  return parse_libsvm(in, opts);
}

void write_libsvm(std::ostream& out, const LabeledDataset& data) {
  char buf[64];
  for (std::size_t i = 0; i < data.n(); ++i) {
    out << data.labels[i];
    for (const auto& f : data.rows[i]) {
      const auto res = std::to_chars(buf, buf + sizeof buf, f.value);
      out << ' ' << (f.index + 1) << ':' << std::string_view(buf, res.ptr - buf);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_libsvm: stream error");
}

LabeledDataset parse_csv_file(const std::string& path, const ParseOptions& opts) {
  std::istringstream in(read_all(path));
  LabeledDataset data;
  std::size_t width = 0;
  std::string raw;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (split_ws(raw).empty()) continue;
    const auto fields = split(raw, ',');
    double probe = 0.0;
    if (line == 1 && !parse_double(fields[0], probe)) continue;  // header
    if (opts.max_rows != 0 && data.n() == opts.max_rows) break;
    if (fields.size() < 2) throw ParseError(line, "expected a label and at least one feature");
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw ParseError(line, "expected " + std::to_string(width) + " fields, got " +
                                 std::to_string(fields.size()));
    }
    const auto label_tokens = split_ws(fields[0]);
    const int label =
        parse_label(label_tokens.size() == 1 ? label_tokens[0] : fields[0], line);
    SparseRow row;
    for (std::size_t c = 1; c < fields.size(); ++c) {
      const auto trimmed = split_ws(fields[c]);
      double value = 0.0;
      if (trimmed.size() != 1 || !parse_double(trimmed[0], value)) {
        throw ParseError(line, "non-numeric value in column " + std::to_string(c + 1));
      }
      if (value != 0.0) row.push_back({c - 1, value});
    }
    data.rows.push_back(std::move(row));
    data.labels.push_back(label);
  }
  data.d = width == 0 ? 0 : width - 1;
  if (opts.dimension != 0 && data.d != opts.dimension) {
    throw std::runtime_error("parse_csv_file: dimension " + std::to_string(data.d) +
                             " does not match declared " + std::to_string(opts.dimension));
  }
  return data;
}

namespace {

using PairKey = std::pair<std::size_t, std::size_t>;

PairKey decode_pair(std::uint64_t idx, std::size_t n) {
  // Row-major enumeration of i < j.
  std::size_t i = 0;
  std::uint64_t row_len = n - 1;
  while (idx >= row_len) {
    idx -= row_len;
    ++i;
    --row_len;
  }
  return {i, i + 1 + static_cast<std::size_t>(idx)};
}

std::vector<PairKey> draw_pairs(const std::vector<int>& labels, bool same, std::size_t m,
                                std::uint64_t population, std::mt19937_64& rng) {
  const std::size_t n = labels.size();
  auto matches = [&](const PairKey& p) { return (labels[p.first] == labels[p.second]) == same; };
  std::vector<PairKey> out;
  if (m == 0) return out;
  // Enumerate small or dense populations; reject-sample sparse requests.
  if (population <= 4'000'000 || 2 * m > population) {
    std::vector<PairKey> all;
    all.reserve(static_cast<std::size_t>(population));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if ((labels[i] == labels[j]) == same) all.emplace_back(i, j);
      }
    }
    for (std::size_t s = 0; s < m; ++s) {
      std::uniform_int_distribution<std::size_t> pick(s, all.size() - 1);
      std::swap(all[s], all[pick(rng)]);
    }
    all.resize(m);
    return all;
  }
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  std::uniform_int_distribution<std::uint64_t> pick(0, total - 1);
  std::set<PairKey> seen;
  while (out.size() < m) {
    const PairKey p = decode_pair(pick(rng), n);
    if (matches(p) && seen.insert(p).second) out.push_back(p);
  }
  return out;
}

}  // namespace

ConstraintSet sample_pair_constraints(const std::vector<int>& labels, std::size_t m_must,
                                      std::size_t m_cannot, std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (n < 2) throw std::invalid_argument("sample_pair_constraints: need at least two points");
  std::map<int, std::uint64_t> counts;
  for (int l : labels) ++counts[l];
  std::uint64_t same = 0;
  for (const auto& [label, c] : counts) same += c * (c - 1) / 2;
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t different = total - same;
  if (m_must > same) {
    throw std::invalid_argument("sample_pair_constraints: requested " + std::to_string(m_must) +
                                " must-links but only " + std::to_string(same) +
                                " same-label pairs exist");
  }
  if (m_cannot > different) {
    throw std::invalid_argument("sample_pair_constraints: requested " +
                                std::to_string(m_cannot) + " cannot-links but only " +
                                std::to_string(different) + " cross-label pairs exist");
  }
  std::mt19937_64 rng(seed);
  std::vector<Link> links;
  links.reserve(m_must + m_cannot);
  for (const auto& [a, b] : draw_pairs(labels, true, m_must, same, rng)) links.push_back({a, b, 1.0});
  for (const auto& [a, b] : draw_pairs(labels, false, m_cannot, different, rng)) {
    links.push_back({a, b, 0.0});
  }
  return ConstraintSet(n, links);
}

namespace {

Eigen::SparseMatrix<double, Eigen::RowMajor> feature_matrix(const LabeledDataset& data,
                                                            bool normalize) {
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t i = 0; i < data.n(); ++i) {
    double norm = 0.0;
    for (const auto& f : data.rows[i]) norm += f.value * f.value;
    norm = std::sqrt(norm);
    const double scale = normalize ? (norm > 0.0 ? 1.0 / norm : 0.0) : 1.0;
    for (const auto& f : data.rows[i]) {
      if (f.index >= data.d) throw std::invalid_argument("feature index exceeds dataset dimension");
      trips.emplace_back(static_cast<int>(i), static_cast<int>(f.index), f.value * scale);
    }
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> A(static_cast<Eigen::Index>(data.n()),
                                                 static_cast<Eigen::Index>(data.d));
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

// Indices of the m best candidates under `better`, excluding `self`.
template <typename Better>
std::vector<std::size_t> select_best(std::size_t n, std::size_t self, std::size_t m,
                                     Better better) {
  std::vector<std::size_t> idx;
  idx.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j != self) idx.push_back(j);
  }
  auto cmp = [&](std::size_t a, std::size_t b) { return better(a, b) || (!better(b, a) && a < b); };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m), idx.end(), cmp);
  idx.resize(m);
  return idx;
}

}  // namespace

SparseSymmetric build_knn_laplacian(const LabeledDataset& data, std::size_t k) {
  const std::size_t n = data.n();
  if (k == 0) throw std::invalid_argument("build_knn_laplacian: k must be >= 1");
  if (k >= n) throw std::invalid_argument("build_knn_laplacian: k must be < n");
  const auto A = feature_matrix(data, true);
  const Eigen::SparseMatrix<double, Eigen::ColMajor> At = A.transpose();

  std::set<PairKey> edges;
  Eigen::VectorXd sims(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    sims.setZero();
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(A, static_cast<Eigen::Index>(i)); it; ++it) {
      for (Eigen::SparseMatrix<double, Eigen::ColMajor>::InnerIterator jt(At, it.col()); jt; ++jt) {
        sims[jt.col()] += it.value() * jt.value();
      }
    }
    for (std::size_t j : select_best(n, i, k, [&](std::size_t a, std::size_t b) {
           return sims[static_cast<Eigen::Index>(a)] > sims[static_cast<Eigen::Index>(b)];
         })) {
      edges.insert(std::minmax(i, j));
    }
  }
  std::vector<double> degree(n, 0.0);
  std::vector<SparseEntry> entries;
  entries.reserve(2 * edges.size() + n);
  for (const auto& [a, b] : edges) {
    degree[a] += 1.0;
    degree[b] += 1.0;
    entries.push_back({a, b, -1.0});
    entries.push_back({b, a, -1.0});
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (degree[i] != 0.0) entries.push_back({i, i, degree[i]});
  }
  return SparseSymmetric(n, entries);
}

double squared_distance(const SparseRow& a, const SparseRow& b) {
  double acc = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    double diff = 0.0;
    if (j == b.size() || (i < a.size() && a[i].index < b[j].index)) {
      diff = a[i++].value;
    } else if (i == a.size() || b[j].index < a[i].index) {
      diff = b[j++].value;
    } else {
      diff = a[i++].value - b[j++].value;
    }
    acc += diff * diff;
  }
  return acc;
}

NeighborSet build_neighbor_set(const LabeledDataset& data, double fraction) {
  const std::size_t n = data.n();
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("build_neighbor_set: fraction must be in (0, 1)");
  }
  if (n < 2) throw std::invalid_argument("build_neighbor_set: need at least two points");
  // The slack keeps products like 0.01 * 100 from rounding up past an integer.
  const double want = std::ceil(fraction * static_cast<double>(n) - 1e-9);
  const std::size_t m = std::clamp<std::size_t>(static_cast<std::size_t>(want), 1, n - 1);

  std::vector<NeighborPair> pairs;
  pairs.reserve(n * m);
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[j] = j == i ? 0.0 : squared_distance(data.rows[i], data.rows[j]);
    for (std::size_t j : select_best(n, i, m, [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; })) {
      pairs.push_back({i, j, dist[j]});
    }
  }
  return NeighborSet(n, pairs);
}

Factor build_centered_label_factor(const std::vector<int>& labels) {
  if (labels.empty()) throw std::invalid_argument("build_centered_label_factor: no labels");
  const Partition p = partition_from_labels(labels);
  const auto n = static_cast<Eigen::Index>(labels.size());
  Factor phi = Factor::Zero(n, static_cast<Eigen::Index>(p.cluster_count()));
  for (Eigen::Index i = 0; i < n; ++i) phi(i, p.labels[i]) = 1.0;
  const Eigen::RowVectorXd mean = phi.colwise().mean();
  phi.rowwise() -= mean;
  return phi;
}

}  // namespace bisdp
