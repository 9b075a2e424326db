#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "dsmetric/discretize.hpp"
#include "dsmetric/sft.hpp"
#include "helpers.hpp"

using namespace dsmetric;
using testutil::Rng;

namespace {

std::shared_ptr<const FiniteMetricSpace> sp(FiniteMetricSpace s) {
  return std::make_shared<const FiniteMetricSpace>(std::move(s));
}

// Independent word counter: integer transfer-matrix power, summed entries.
double matrix_power_count(const std::vector<std::vector<std::uint8_t>>& A, std::size_t len) {
  const std::size_t k = A.size();
  if (len == 0) return 1;
  std::vector<std::vector<double>> P(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) P[i][i] = 1;
  for (std::size_t s = 1; s < len; ++s) {
    std::vector<std::vector<double>> Q(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        if (A[i][j])
          for (std::size_t c = 0; c < k; ++c) Q[i][c] += P[j][c];
    P = Q;
  }
  double total = 0;
  for (const auto& row : P)
    for (double x : row) total += x;
  return total;
}

// Symbols on a line, spaced `gap` apart, and a random valid relation on all
// of them.
DynamicalRelation spaced_relation(Rng& rng, std::size_t k, double gap) {
  std::vector<double> xs(k);
  for (std::size_t i = 0; i < k; ++i) xs[i] = static_cast<double>(i) * gap;
  auto space = sp(line_space(xs));
  return testutil::rand_relation(rng, space, k, 0.6);
}

}  // namespace

TEST_CASE("transition matrix mirrors the relation pairs") {
  auto S = sp(line_space({0.0, 1.0, 2.0}));
  auto f = make_relation(S, {{0, 1}, {1, 0}, {1, 2}, {2, 1}});
  auto T = sft_from_relation(f);
  REQUIRE(T.symbols == std::vector<std::size_t>{0, 1, 2});
  CHECK(T.A[0][1] == 1);
  CHECK(T.A[1][0] == 1);
  CHECK(T.A[1][2] == 1);
  CHECK(T.A[2][1] == 1);
  CHECK(T.A[0][0] == 0);
  CHECK(T.A[2][2] == 0);
  CHECK(rows_and_columns_nonempty(T));
}

TEST_CASE("word enumeration matches the transfer-matrix count") {
  Rng rng(481516);
  for (int iter = 0; iter < 40; ++iter) {
    auto S = sp(testutil::rand_line_space(rng, 5));
    std::size_t csize = 2 + static_cast<std::size_t>(rng() % 3);
    auto f = testutil::rand_relation(rng, S, csize, 0.8);
    auto T = sft_from_relation(f);
    for (std::size_t n = 0; n <= 2; ++n) {
      auto words = enumerate_words(T, n);
      CHECK(static_cast<double>(words.size()) == matrix_power_count(T.A, 2 * n + 1));
      CHECK(std::is_sorted(words.begin(), words.end()));
      CHECK(std::adjacent_find(words.begin(), words.end()) == words.end());
      for (const auto& w : words) {
        REQUIRE(w.size() == 2 * n + 1);
        for (std::size_t m = 0; m + 1 < w.size(); ++m) CHECK(T.A[w[m]][w[m + 1]] == 1);
        // windows of bi-infinite sequences: one admissible step on each side
        bool right = false, left = false;
        for (std::size_t s = 0; s < T.k(); ++s) {
          right |= T.A[w.back()][s] != 0;
          left |= T.A[s][w.front()] != 0;
        }
        CHECK(right);
        CHECK(left);
      }
    }
  }
}

TEST_CASE("no-consecutive-repeat system has five windows of length three") {
  // two symbols, transitions 0->0, 0->1, 1->0 (the word "11" is forbidden)
  auto S = sp(line_space({0.0, 10.0}));
  auto f = make_relation(S, {{0, 0}, {0, 1}, {1, 0}});
  auto T = sft_from_relation(f);
  auto words = enumerate_words(T, 1);
  std::vector<std::vector<std::size_t>> expect = {
      {0, 0, 0}, {0, 0, 1}, {0, 1, 0}, {1, 0, 0}, {1, 0, 1}};
  REQUIRE(words == expect);

  auto E = embed_cylinders(T, f, 1, 1.0, 0);
  REQUIRE(E.cyl.size() == 5);
  REQUIRE(E.combined->size() == 7);
  // base offset 1/64, then place value: center /4, right /8, left /16
  CHECK(E.combined->pts[2][0] == 0.015625);   // 000
  CHECK(E.combined->pts[3][0] == 0.140625);   // 001
  CHECK(E.combined->pts[4][0] == 10.265625);  // 010 sits in the ball of symbol 1
  CHECK(E.combined->pts[5][0] == 0.078125);   // 100
  CHECK(E.combined->pts[6][0] == 0.203125);   // 101
  CHECK(E.certified == 0.265625);             // 17/64, exactly dyadic
}

TEST_CASE("full shift with a trivial window embeds one point per symbol") {
  auto S = sp(line_space({0.0, 10.0}));
  auto f = make_relation(S, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  auto T = sft_from_relation(f);
  auto E = embed_cylinders(T, f, 0, 1.0, 0);
  REQUIRE(E.cyl.size() == 2);
  CHECK(E.combined->pts[2][0] == 0.0625);
  CHECK(E.combined->pts[3][0] == 10.3125);
  CHECK(E.h.pairs.size() == 4);  // full shift: every cylinder to every cylinder
  CHECK(E.certified == 0.3125);
}

TEST_CASE("cylinder points stay in their symbol ball and are pairwise distinct") {
  Rng rng(908712);
  for (int iter = 0; iter < 25; ++iter) {
    std::size_t k = 2 + rng() % 3;
    double eps = 0.2 + 0.1 * static_cast<double>(rng() % 3);
    auto f = spaced_relation(rng, k, 4.0 * eps + 0.5);
    auto T = sft_from_relation(f);
    std::size_t n = rng() % 3;
    std::size_t bits = rng() % 3;
    auto E = embed_cylinders(T, f, n, eps, bits);

    std::set<std::vector<double>> seen;
    for (const auto& p : E.combined->pts) CHECK(seen.insert(p).second);
    for (std::size_t i = 0; i < E.cyl.size(); ++i) {
      std::size_t center = T.symbols[E.cyl[i].letters[n]];
      CHECK(E.combined->dist(E.base_size + i, center) <= 0.875 * eps + 1e-15);
    }
    // certificate, recomputed by the independent oracle
    CHECK(E.certified <= eps);
    double check = testutil::oracle_ds(*E.combined, E.h.pairs, E.g.pairs);
    CHECK(E.certified == check);
  }
}

TEST_CASE("shift fibers collapse under the splitting factor of an identity system") {
  auto S = sp(line_space({0.0, 100.0}));
  auto f = make_relation(S, {{0, 0}, {1, 1}});
  auto T = sft_from_relation(f);

  auto E0 = embed_cylinders(T, f, 1, 1.0, 0);
  auto prof0 = shift_fiber_profile(E0);
  CHECK(prof0.first == 0.0);  // deterministic letters, no bits: singleton fibers
  CHECK(prof0.second == 0.0);

  double prev_fwd = -1, prev_bwd = -1;
  for (std::size_t bits = 1; bits <= 4; ++bits) {
    auto E = embed_cylinders(T, f, 1, 1.0, bits);
    auto prof = shift_fiber_profile(E);
    CHECK(prof.first > 0.0);
    if (prev_fwd >= 0) {
      CHECK(prof.first <= prev_fwd / 2.0 + 1e-15);  // forward fiber halves per bit
      CHECK(prof.second <= prev_bwd + 1e-15);       // backward never grows
      if (bits >= 3) CHECK(prof.second <= prev_bwd / 2.0 + 1e-15);
    }
    prev_fwd = prof.first;
    prev_bwd = prof.second;
  }
}

TEST_CASE("fiber profile is nonincreasing in the window length") {
  Rng rng(342199);
  for (int iter = 0; iter < 30; ++iter) {
    std::size_t k = 2 + rng() % 3;
    double eps = 0.25;
    auto f = spaced_relation(rng, k, 4.0 * eps);
    auto T = sft_from_relation(f);
    std::size_t bits = rng() % 2;
    double pf = -1, pb = -1;
    for (std::size_t n = 0; n <= 2; ++n) {
      auto E = embed_cylinders(T, f, n, eps, bits);
      CHECK(E.certified <= eps);
      auto prof = shift_fiber_profile(E);
      if (pf >= 0) {
        CHECK(prof.first <= pf + 1e-12);
        CHECK(prof.second <= pb + 1e-12);
      }
      pf = prof.first;
      pb = prof.second;
    }
  }
}

TEST_CASE("embedding works on wrapped coordinate spaces") {
  SECTION("circle") {
    auto S = sp(circle_space({0.0, 2.0, 4.0}));
    auto f = make_relation(S, {{0, 1}, {1, 2}, {2, 0}});
    auto T = sft_from_relation(f);
    auto E = embed_cylinders(T, f, 1, 0.4, 1);
    CHECK(E.certified <= 0.4);
    for (std::size_t i = 0; i < E.cyl.size(); ++i) {
      std::size_t center = T.symbols[E.cyl[i].letters[1]];
      CHECK(E.combined->dist(E.base_size + i, center) <= 0.875 * 0.4 + 1e-15);
    }
  }
  SECTION("torus, offsets wrap across 1") {
    auto S = sp(torus_space({{0.95, 0.2}, {0.45, 0.7}}));
    auto f = make_relation(S, {{0, 1}, {1, 0}});
    auto T = sft_from_relation(f);
    auto E = embed_cylinders(T, f, 1, 0.3, 0);
    CHECK(E.certified <= 0.3);
    double c = testutil::oracle_ds(*E.combined, E.h.pairs, E.g.pairs);
    CHECK(E.certified == c);
  }
}

TEST_CASE("embedding rejects bad inputs") {
  auto M = sp(matrix_space({{0, 1}, {1, 0}}));
  auto fm = make_relation(M, {{0, 1}, {1, 0}});
  auto Tm = sft_from_relation(fm);
  CHECK_THROWS_AS(embed_cylinders(Tm, fm, 1, 0.5, 0), DsError);
  try {
    embed_cylinders(Tm, fm, 1, 0.5, 0);
  } catch (const DsError& e) {
    CHECK(e.code == Err::NotEuclideanAmbient);
  }

  auto S = sp(line_space({0.0, 5.0}));
  auto f = make_relation(S, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  auto T = sft_from_relation(f);
  CHECK_THROWS_AS(enumerate_words(T, 2, 10), DsError);  // 32 words > budget 10
  try {
    enumerate_words(T, 2, 10);
  } catch (const DsError& e) {
    CHECK(e.code == Err::DepthOverflow);
  }
  CHECK_THROWS_AS(embed_cylinders(T, f, 1, 0.5, 4, 20), DsError);  // 8*16 points > 20
  CHECK_THROWS_AS(embed_cylinders(T, f, 1, 0.0, 0), DsError);
}

TEST_CASE("discretize then lift: the full chain certificate") {
  Rng rng(66110);
  for (int iter = 0; iter < 10; ++iter) {
    auto S = sp(testutil::rand_line_space(rng, 8, 0.0, 4.0));
    auto f = testutil::rand_relation(rng, S, 6, 0.4);
    double eps = 0.5;
    auto ap = finite_relation_approx(f, eps);
    auto T = sft_from_relation(ap.g);
    auto E = embed_cylinders(T, ap.g, 1, eps, 0);
    // D(f, g) <= eps and D(g, h) <= eps were both certified; sanity-check the
    // triangle through the chain on the shared ambient space
    CHECK(ap.realized <= eps);
    CHECK(E.certified <= eps);
  }
}
