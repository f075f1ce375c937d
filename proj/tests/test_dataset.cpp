#include <gtest/gtest.h>
#include <zlib.h>

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <utility>

#include "bisdp/dataset.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bisdp;

namespace {

LabeledDataset parse_text(const std::string& text, const ParseOptions& opts = {}) {
  std::istringstream in(text);
  return parse_libsvm(in, opts);
}

std::size_t error_line(const std::string& text) {
  try {
    parse_text(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

LabeledDataset dense_points(const std::vector<std::vector<double>>& pts,
                            std::vector<int> labels = {}) {
  LabeledDataset data;
  data.d = pts.empty() ? 0 : pts[0].size();
  for (const auto& p : pts) {
    SparseRow row;
    for (std::size_t c = 0; c < p.size(); ++c) {
      if (p[c] != 0.0) row.push_back({c, p[c]});
    }
    data.rows.push_back(std::move(row));
  }
  data.labels = labels.empty() ? std::vector<int>(pts.size(), 1) : std::move(labels);
  return data;
}

LabeledDataset random_dataset(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  std::bernoulli_distribution keep(0.3), sign(0.5);
  LabeledDataset data;
  data.d = d;
  for (std::size_t i = 0; i < n; ++i) {
    SparseRow row;
    for (std::size_t c = 0; c < d; ++c) {
      if (keep(rng)) row.push_back({c, val(rng)});
    }
    data.rows.push_back(std::move(row));
    data.labels.push_back(sign(rng) ? 1 : -1);
  }
  return data;
}

double dense_sq_distance(const LabeledDataset& data, std::size_t a, std::size_t b) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.d));
  for (const auto& f : data.rows[a]) x[f.index] += f.value;
  for (const auto& f : data.rows[b]) x[f.index] -= f.value;
  return x.squaredNorm();
}

}  // namespace

TEST(ParseLibsvm, SingleLine) {
  LabeledDataset data = parse_text("+1 3:1 7:0.5\n");
  ASSERT_EQ(data.n(), 1u);
  EXPECT_EQ(data.labels[0], 1);
  ASSERT_EQ(data.rows[0].size(), 2u);
  EXPECT_EQ(data.rows[0][0].index, 2u);
  EXPECT_EQ(data.rows[0][0].value, 1.0);
  EXPECT_EQ(data.rows[0][1].index, 6u);
  EXPECT_EQ(data.rows[0][1].value, 0.5);
  EXPECT_EQ(data.d, 7u);
}

TEST(ParseLibsvm, BlankLinesCommentsAndEmptyRows) {
  LabeledDataset data = parse_text("\n# header\n-1 1:2 # trailing\n\n  +1\n");
  ASSERT_EQ(data.n(), 2u);
  EXPECT_EQ(data.labels, (std::vector<int>{-1, 1}));
  EXPECT_TRUE(data.rows[1].empty());
}

TEST(ParseLibsvm, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("1 1:1\n1 4:1 2:1\n"), 2u);
  EXPECT_EQ(error_line("1 1:1\n\n1 2:2 2:3\n"), 3u);
  EXPECT_EQ(error_line("1 1:x\n"), 1u);
  EXPECT_EQ(error_line("1 1:1\nabc 1:1\n"), 2u);
  EXPECT_EQ(error_line("1 0:1\n"), 1u);
  EXPECT_EQ(error_line("1 1:1\n1 5\n"), 2u);
  try {
    parse_text("1 1:1\n1 3:1 3:1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(ParseLibsvm, DimensionHint) {
  ParseOptions opts;
  opts.dimension = 10;
  EXPECT_EQ(parse_text("1 3:1\n", opts).d, 10u);
  opts.dimension = 2;
  EXPECT_THROW(parse_text("1 3:1\n", opts), ParseError);
}

TEST(ParseLibsvm, MaxRows) {
  ParseOptions opts;
  opts.max_rows = 2;
  EXPECT_EQ(parse_text("1 1:1\n-1 2:1\n1 3:1\n", opts).n(), 2u);
}

TEST(ParseLibsvm, RoundTripIsIdentity) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    LabeledDataset data = random_dataset(15, 9, rng);
    std::ostringstream out;
    write_libsvm(out, data);
    ParseOptions opts;
    opts.dimension = data.d;
    LabeledDataset back = parse_text(out.str(), opts);
    ASSERT_EQ(back.n(), data.n());
    EXPECT_EQ(back.d, data.d);
    EXPECT_EQ(back.labels, data.labels);
    for (std::size_t i = 0; i < data.n(); ++i) {
      ASSERT_EQ(back.rows[i].size(), data.rows[i].size());
      for (std::size_t k = 0; k < data.rows[i].size(); ++k) {
        EXPECT_EQ(back.rows[i][k].index, data.rows[i][k].index);
        EXPECT_EQ(back.rows[i][k].value, data.rows[i][k].value);
      }
    }
  }
}

TEST(ParseLibsvm, ReadsGzipAndPlainFiles) {
  fixture::TempDir dir;
  const std::string text = "+1 3:1 7:0.5\n-1 1:0.25\n";
  {
    std::ofstream(dir.file("plain.txt")) << text;
    gzFile gz = gzopen(dir.file("packed.gz").c_str(), "wb");
    ASSERT_NE(gz, nullptr);
    gzwrite(gz, text.data(), static_cast<unsigned>(text.size()));
    gzclose(gz);
  }
  LabeledDataset a = parse_libsvm_file(dir.file("plain.txt"));
  LabeledDataset b = parse_libsvm_file(dir.file("packed.gz"));
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.n(), 2u);
  EXPECT_EQ(b.rows[1][0].value, 0.25);
  EXPECT_THROW(parse_libsvm_file(dir.file("missing")), std::runtime_error);
}

TEST(ParseCsv, HeaderAndRows) {
  fixture::TempDir dir;
  std::ofstream(dir.file("d.csv")) << "label,x1,x2\n1,0.5,0\n2,0,-1.5\n";
  LabeledDataset data = parse_csv_file(dir.file("d.csv"));
  EXPECT_EQ(data.n(), 2u);
  EXPECT_EQ(data.d, 2u);
  EXPECT_EQ(data.labels, (std::vector<int>{1, 2}));
  ASSERT_EQ(data.rows[1].size(), 1u);
  EXPECT_EQ(data.rows[1][0].index, 1u);
  std::ofstream(dir.file("bad.csv")) << "1,0.5\n2,0.1,0.2\n";
  EXPECT_THROW(parse_csv_file(dir.file("bad.csv")), ParseError);
}

TEST(ParseLibsvm, A1aShape) {
  const auto path = fixture::a1a_path();
  if (!path) GTEST_SKIP() << "a1a not found (set BISDP_A1A or place it at data/a1a)";
  ParseOptions opts;
  opts.dimension = 123;
  LabeledDataset data = parse_libsvm_file(*path, opts);
  EXPECT_EQ(data.n(), 1605u);
  EXPECT_EQ(data.d, 123u);
  std::set<int> classes(data.labels.begin(), data.labels.end());
  EXPECT_EQ(classes, (std::set<int>{-1, 1}));
}

TEST(SamplePairs, SupportOnFourPoints) {
  const std::vector<int> labels{0, 0, 1, 1};
  std::set<std::pair<std::size_t, std::size_t>> must_seen, cannot_seen;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    ConstraintSet c = sample_pair_constraints(labels, 1, 1, seed);
    EXPECT_EQ(c.must_count(), 1u);
    EXPECT_EQ(c.cannot_count(), 1u);
    for (const auto& p : c.pairs()) {
      if (p.j >= p.i) continue;
      if (p.kind == PairKind::kMust) must_seen.insert({p.j, p.i});
      if (p.kind == PairKind::kCannot) cannot_seen.insert({p.j, p.i});
    }
  }
  EXPECT_EQ(must_seen, (std::set<std::pair<std::size_t, std::size_t>>{{0, 1}, {2, 3}}));
  EXPECT_EQ(cannot_seen.size(), 4u);
  for (const auto& [a, b] : cannot_seen) EXPECT_NE(labels[a], labels[b]);
}

TEST(SamplePairs, LabelsAgreeWithKinds) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> cls(0, 2);
  std::vector<int> labels(80);
  for (auto& l : labels) l = cls(rng);
  ConstraintSet c = sample_pair_constraints(labels, 60, 90, 5);
  EXPECT_EQ(c.must_count(), 60u);
  EXPECT_EQ(c.cannot_count(), 90u);
  std::size_t diag = 0;
  for (const auto& p : c.pairs()) {
    switch (p.kind) {
      case PairKind::kMust:
        EXPECT_EQ(labels[p.i], labels[p.j]);
        EXPECT_EQ(p.target, 1.0);
        break;
      case PairKind::kCannot:
        EXPECT_NE(labels[p.i], labels[p.j]);
        EXPECT_EQ(p.target, 0.0);
        break;
      case PairKind::kDiagonal:
        EXPECT_EQ(p.i, p.j);
        ++diag;
        break;
    }
  }
  EXPECT_EQ(diag, labels.size());
  EXPECT_EQ(c.pairs().size(), labels.size() + 2 * (60u + 90u));
}

TEST(SamplePairs, DeterministicGivenSeed) {
  std::vector<int> labels(50);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 3);
  auto key = [](const ConstraintSet& c) {
    std::vector<std::tuple<std::size_t, std::size_t, double>> v;
    for (const auto& p : c.pairs()) v.emplace_back(p.j, p.i, p.target);
    return v;
  };
  EXPECT_EQ(key(sample_pair_constraints(labels, 20, 20, 9)),
            key(sample_pair_constraints(labels, 20, 20, 9)));
  EXPECT_NE(key(sample_pair_constraints(labels, 20, 20, 9)),
            key(sample_pair_constraints(labels, 20, 20, 10)));
}

TEST(SamplePairs, InsufficientPairs) {
  EXPECT_THROW(sample_pair_constraints({0, 0, 1, 1}, 3, 0, 0), std::invalid_argument);
  EXPECT_THROW(sample_pair_constraints({0, 0, 1, 1}, 0, 5, 0), std::invalid_argument);
  EXPECT_THROW(sample_pair_constraints({0, 0, 0}, 0, 1, 0), std::invalid_argument);
  EXPECT_NO_THROW(sample_pair_constraints({0, 0, 1, 1}, 2, 4, 0));
}

TEST(KnnLaplacian, PathGraph) {
  // Cosine neighbors: 0 -> 1, 1 -> 2, 2 -> 1.
  LabeledDataset data = dense_points({{1, 0}, {1, 1}, {1, 2}});
  Eigen::MatrixXd expected(3, 3);
  expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  EXPECT_EQ(build_knn_laplacian(data, 1).to_dense(), expected);
}

TEST(KnnLaplacian, ZeroRowSumsAndPsd) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    LabeledDataset data = random_dataset(40, 12, rng);
    SparseSymmetric L = build_knn_laplacian(data, 5);
    const Eigen::MatrixXd D = L.to_dense();
    EXPECT_LE(D.rowwise().sum().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((D - D.transpose()).norm(), 0.0);
    for (Eigen::Index i = 0; i < D.rows(); ++i) EXPECT_GE(D(i, i), 5.0);
    std::normal_distribution<double> gauss;
    for (int k = 0; k < 100; ++k) {
      Eigen::VectorXd x(40);
      for (auto& v : x) v = gauss(rng);
      EXPECT_GE(x.dot(D * x), -1e-10);
    }
  }
}

TEST(KnnLaplacian, BadK) {
  LabeledDataset data = dense_points({{1, 0}, {0, 1}, {1, 1}});
  EXPECT_THROW(build_knn_laplacian(data, 0), std::invalid_argument);
  EXPECT_THROW(build_knn_laplacian(data, 3), std::invalid_argument);
}

TEST(NeighborSetBuilder, PointsOnALine) {
  LabeledDataset data = dense_points({{0.0}, {1.0}, {3.0}});
  NeighborSet ns = build_neighbor_set(data, 0.3);
  std::set<std::tuple<std::size_t, std::size_t, double>> got;
  for (const auto& p : ns.pairs()) got.insert({p.i, p.j, p.distance_sq});
  std::set<std::tuple<std::size_t, std::size_t, double>> expected{
      {0, 1, 1.0}, {1, 0, 1.0}, {2, 1, 4.0}, {1, 2, 4.0}};
  EXPECT_EQ(got, expected);
}

TEST(NeighborSetBuilder, MatchesBruteForce) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 5; ++trial) {
    LabeledDataset data = random_dataset(50, 6, rng);
    const double fraction = 0.05;
    NeighborSet ns = build_neighbor_set(data, fraction);
    std::set<std::pair<std::size_t, std::size_t>> expected;
    for (std::size_t i = 0; i < 50; ++i) {
      std::vector<std::pair<double, std::size_t>> order;
      for (std::size_t j = 0; j < 50; ++j) {
        if (j != i) order.push_back({dense_sq_distance(data, i, j), j});
      }
      std::sort(order.begin(), order.end());
      for (std::size_t m = 0; m < 3; ++m) {  // ceil(0.05 * 50) = 3
        expected.insert({i, order[m].second});
        expected.insert({order[m].second, i});
      }
    }
    std::set<std::pair<std::size_t, std::size_t>> got;
    for (const auto& p : ns.pairs()) {
      got.insert({p.i, p.j});
      EXPECT_GE(p.distance_sq, 0.0);
      EXPECT_NEAR(p.distance_sq, dense_sq_distance(data, p.i, p.j), 1e-12);
    }
    EXPECT_EQ(got, expected);
  }
}

TEST(NeighborSetBuilder, CeilingArithmetic) {
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 100; ++i) pts.push_back({static_cast<double>(i * i)});
  NeighborSet ns = build_neighbor_set(dense_points(pts), 0.01);
  // Each point's single nearest neighbor is its left neighbor (except point 0).
  std::set<std::pair<std::size_t, std::size_t>> got;
  for (const auto& p : ns.pairs()) {
    if (p.i < p.j) got.insert({p.i, p.j});
  }
  EXPECT_EQ(got.size(), 99u);
  for (const auto& [a, b] : got) EXPECT_EQ(b, a + 1);
  EXPECT_THROW(build_neighbor_set(dense_points(pts), 0.0), std::invalid_argument);
  EXPECT_THROW(build_neighbor_set(dense_points(pts), 1.0), std::invalid_argument);
}

TEST(SquaredDistance, SparseMerge) {
  SparseRow a{{0, 1.0}, {3, 2.0}};
  SparseRow b{{1, 1.0}, {3, -1.0}};
  EXPECT_EQ(squared_distance(a, b), 1.0 + 1.0 + 9.0);
  EXPECT_EQ(squared_distance(a, a), 0.0);
}

TEST(CenteredLabelFactor, TwoPoints) {
  Factor F = build_centered_label_factor({4, 9});
  Eigen::MatrixXd expected(2, 2);
  expected << 0.5, -0.5, -0.5, 0.5;
  EXPECT_EQ(F, expected);
}

TEST(CenteredLabelFactor, ColumnsSumToZeroAndMatchHSandwich) {
  std::mt19937_64 rng(15);
  std::uniform_int_distribution<int> cls(0, 3);
  for (std::size_t n = 1; n <= 16; ++n) {
    std::vector<int> labels(n);
    for (auto& l : labels) l = cls(rng);
    Factor F = build_centered_label_factor(labels);
    EXPECT_LE(F.colwise().sum().cwiseAbs().maxCoeff(), 1e-12);
    const Eigen::MatrixXd K = oracle::centered_label_kernel(labels);
    EXPECT_LE((F * F.transpose() - K).norm(), 1e-12);
  }
  EXPECT_THROW(build_centered_label_factor({}), std::invalid_argument);
}
