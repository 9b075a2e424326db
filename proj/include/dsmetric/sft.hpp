#pragma once
// Shift-of-finite-type lift of a finite relation: transition matrix, cylinder
// word enumeration (finite windows of bi-infinite admissible sequences, plus
// a {0,1} splitting factor), and an embedding of the cylinder points back
// into the ambient space on a dyadic offset grid so that the induced shift
// relation stays within eps of the source relation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "dsmetric/core.hpp"
#include "dsmetric/metric_space.hpp"
#include "dsmetric/relation.hpp"

namespace dsmetric {

struct TransitionSystem {
  std::shared_ptr<const FiniteMetricSpace> space;
  std::vector<std::size_t> symbols;         // ambient indices, sorted
  std::vector<std::vector<std::uint8_t>> A; // A[i][j] = 1 iff (symbols[i], symbols[j]) allowed

  std::size_t k() const { return symbols.size(); }
};

inline TransitionSystem sft_from_relation(const DynamicalRelation& g) {
  TransitionSystem T;
  T.space = g.space;
  T.symbols = carrier(g);
  const std::size_t k = T.symbols.size();
  T.A.assign(k, std::vector<std::uint8_t>(k, 0));
  std::map<std::size_t, std::size_t> pos;
  for (std::size_t i = 0; i < k; ++i) pos[T.symbols[i]] = i;
  for (const auto& p : g.pairs) T.A[pos[p.first]][pos[p.second]] = 1;
  return T;
}

// Number of admissible words of the given length, by the transfer matrix
// (sum of the entries of A^(len-1)); saturates instead of overflowing.
inline double count_words(const TransitionSystem& T, std::size_t len) {
  const std::size_t k = T.k();
  if (len == 0) return 1;
  std::vector<double> v(k, 1.0);  // column sums of successive powers
  for (std::size_t step = 1; step < len; ++step) {
    std::vector<double> nv(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < k; ++j)
        if (T.A[i][j]) s += v[j];
      nv[i] = std::min(s, 1e18);
    }
    v = nv;
  }
  double total = 0;
  for (double x : v) total = std::min(total + x, 1e18);
  return total;
}

// All admissible windows of length 2n+1 in lexicographic order; letters are
// symbol positions 0..k-1.
inline std::vector<std::vector<std::size_t>> enumerate_words(const TransitionSystem& T,
                                                             std::size_t n,
                                                             std::size_t budget = 200000) {
  const std::size_t len = 2 * n + 1;
  if (count_words(T, len) > static_cast<double>(budget))
    fail(Err::DepthOverflow, "word count exceeds budget " + std::to_string(budget));
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  auto rec = [&](auto&& self, std::size_t depth) -> void {
    if (depth == len) {
      out.push_back(cur);
      return;
    }
    for (std::size_t s = 0; s < T.k(); ++s) {
      if (depth > 0 && !T.A[cur.back()][s]) continue;
      cur.push_back(s);
      self(self, depth + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

// Every admissible word extends one step on both sides exactly when every
// row and every column of A has an entry; checked when lifting.
inline bool rows_and_columns_nonempty(const TransitionSystem& T) {
  const std::size_t k = T.k();
  for (std::size_t i = 0; i < k; ++i) {
    bool row = false, col = false;
    for (std::size_t j = 0; j < k; ++j) {
      row |= T.A[i][j] != 0;
      col |= T.A[j][i] != 0;
    }
    if (!row || !col) return false;
  }
  return true;
}

struct CylinderWord {
  std::vector<std::size_t> letters;  // window of length 2n+1, symbol positions
  std::uint32_t bits = 0;            // splitting-factor window, `bit_count` low bits
  std::size_t bit_count = 0;
};

struct EmbeddedSft {
  std::shared_ptr<const FiniteMetricSpace> combined;  // base points, then cylinder points
  std::size_t base_size = 0;
  DynamicalRelation g;       // source relation, reindexed onto the combined space
  DynamicalRelation h;       // induced shift relation on the cylinder points
  std::vector<CylinderWord> cyl;  // cyl[i] describes combined point base_size + i
  double eps = 0;
  double certified = 0;      // recomputed system distance between h and g
  double letter_unit = 0, bit_unit = 0;
};

namespace detail {

// Offset of one cylinder point inside its symbol ball.  Letters form a
// place-value number, most significant at the window center and decaying
// toward both ends, so the free positions of a one-step shift carry the
// smallest weights.  Bit weights are distinct powers of two scaled to a
// block that always stays below the least letter weight; the first and last
// bit get the two smallest exponents for the same reason.  A base offset of
// L/4 keeps every cylinder point strictly away from its own symbol point
// (total offset stays below 7/8 of the ball radius).
inline double cylinder_offset(const std::vector<std::size_t>& letters, std::uint32_t bits,
                              std::size_t bit_count, std::size_t n, std::size_t k, double L,
                              double beta) {
  double off = L / 4.0;
  double w = L;
  for (std::size_t m = 2 * n + 1; m-- > 0;) {
    // significance rank m from least to most: position order center,+1,-1,...,+n,-n
    std::size_t pos = (m == 0) ? n : (m % 2 == 1 ? n + (m + 1) / 2 : n - m / 2);
    off += static_cast<double>(letters[pos]) * w;
    w *= static_cast<double>(k);
  }
  for (std::size_t j = 0; j < bit_count; ++j) {
    if (!((bits >> (bit_count - 1 - j)) & 1u)) continue;  // j = 0 is the first (oldest) bit
    std::size_t e;
    if (bit_count == 1) e = 0;
    else if (j == 0) e = 1;
    else if (j + 1 == bit_count) e = 0;
    else e = j + 1;
    off += beta * static_cast<double>(1u << e);
  }
  return off;
}

inline std::vector<double> offset_point(const FiniteMetricSpace& S, std::size_t base_idx,
                                        double off) {
  std::vector<double> p = S.pts[base_idx];
  p[0] += off;
  return p;
}

}  // namespace detail

inline std::pair<double, double> shift_fiber_profile(const EmbeddedSft& E) {
  return {max_fiber_diameter(E.h), max_fiber_diameter(inverse(E.h))};
}

inline EmbeddedSft embed_cylinders(const TransitionSystem& T, const DynamicalRelation& g,
                                   std::size_t n, double eps, std::size_t bits,
                                   std::size_t budget = 200000) {
  if (!(eps > 0.0)) fail(Err::BadShape, "embedding radius must be positive");
  if (bits > 20) fail(Err::BudgetExceeded, "splitting depth too large");
  const FiniteMetricSpace& S = *T.space;
  if (!S.has_coords())
    fail(Err::NotEuclideanAmbient, "cylinder embedding needs a coordinate ambient");
  if (!rows_and_columns_nonempty(T))
    fail(Err::BadShape, "transition matrix has an empty row or column");
  if (!same_space(S, g.S())) fail(Err::SpaceMismatch, "transition system and relation disagree");

  const std::size_t k = T.k();
  auto words = enumerate_words(T, n, budget);
  const std::size_t patterns = std::size_t{1} << bits;
  if (words.size() > budget / patterns)
    fail(Err::BudgetExceeded, "cylinder point count exceeds budget");
  const std::size_t npts = words.size() * patterns;

  // dyadic offset scales
  double kpow = std::pow(static_cast<double>(k), static_cast<double>(2 * n + 1));
  double L = (eps / 2.0) / kpow;
  double bitspan =
      std::min(eps * std::pow(2.0, -static_cast<double>(n + bits + 1)), L / 2.0);
  double beta = bitspan / static_cast<double>(patterns);

  EmbeddedSft E;
  E.base_size = S.size();
  E.eps = eps;

  std::vector<std::vector<double>> coords;
  for (int attempt = 0; attempt < 8; ++attempt) {
    coords = S.pts;
    coords.reserve(S.size() + npts);
    for (const auto& w : words) {
      std::size_t center_sym = T.symbols[w[n]];
      for (std::uint32_t b = 0; b < patterns; ++b) {
        double off = detail::cylinder_offset(w, b, bits, n, k, L, beta);
        coords.push_back(detail::offset_point(S, center_sym, off));
      }
    }
    // cross-ball collisions are geometrically possible; detect and rescale
    auto sorted = coords;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) break;
    L *= 0.5;
    beta *= 0.5;
    if (attempt == 7) fail(Err::BadShape, "could not separate cylinder points (internal)");
  }
  E.letter_unit = L;
  E.bit_unit = beta;

  auto combined = std::make_shared<FiniteMetricSpace>();
  combined->kind = S.kind;
  combined->pts = std::move(coords);
  E.combined = combined;

  // cylinder word bookkeeping
  E.cyl.reserve(npts);
  for (const auto& w : words)
    for (std::uint32_t b = 0; b < patterns; ++b) E.cyl.push_back({w, b, bits});

  // induced shift: drop the first letter/bit, append any admissible letter
  // and any bit
  std::vector<IndexPair> hp;
  const std::uint32_t mask = static_cast<std::uint32_t>(patterns - 1);
  for (std::size_t wi = 0; wi < words.size(); ++wi) {
    std::vector<std::size_t> nxt(words[wi].begin() + 1, words[wi].end());
    nxt.push_back(0);
    for (std::size_t ell = 0; ell < k; ++ell) {
      if (!T.A[words[wi][2 * n]][ell]) continue;
      nxt[2 * n] = ell;
      auto it = std::lower_bound(words.begin(), words.end(), nxt);
      if (it == words.end() || *it != nxt)
        fail(Err::BadShape, "successor word missing (internal)");
      std::size_t wj = static_cast<std::size_t>(it - words.begin());
      for (std::uint32_t b = 0; b < patterns; ++b) {
        std::size_t from = E.base_size + wi * patterns + b;
        if (bits == 0) {
          hp.emplace_back(from, E.base_size + wj * patterns);
        } else {
          for (std::uint32_t nb = 0; nb <= 1; ++nb) {
            std::uint32_t b2 = ((b << 1) & mask) | nb;
            hp.emplace_back(from, E.base_size + wj * patterns + b2);
          }
        }
      }
    }
  }
  E.h = make_relation(combined, std::move(hp));
  E.g = DynamicalRelation{combined, g.pairs};  // base indices are unchanged
  E.certified = ds_distance(E.h, E.g).value;
  if (E.certified > eps)
    fail(Err::BadShape, "embedding certificate failed (internal): distance above eps");
  return E;
}

}  // namespace dsmetric
