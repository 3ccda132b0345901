#ifndef BILATERAL_TRADE_CORE_HPP
#define BILATERAL_TRADE_CORE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bilateral/rational.hpp"

namespace bilateral {

// One round's hidden valuations. No ordering between s and b is required; a
// round with b < s never trades.
struct ValuationPair {
  double s = 0.0;  // seller
  double b = 0.0;  // buyer

  bool in_unit_square() const {
    return s >= 0.0 && s <= 1.0 && b >= 0.0 && b <= 1.0;
  }
};

// Seller price p and buyer price q. Budget balance requires p <= q; a single
// posted price is p == q.
struct PricePair {
  double p = 0.0;
  double q = 0.0;

  static PricePair single(double price) { return {price, price}; }

  bool budget_balanced() const { return p <= q; }
  bool in_unit_range() const { return p >= 0.0 && q <= 1.0 && p <= 1.0 && q >= 0.0; }
  bool is_single() const { return p == q; }

  friend bool operator==(const PricePair&, const PricePair&) = default;
};

// Gain from trade with closed inequalities: (b - s) * 1{s <= p <= q <= b}.
// Templated so the partial-monitoring module can evaluate it on rationals.
template <class Real>
Real basic_gain_from_trade(const Real& p, const Real& q, const Real& s, const Real& b) {
  if (s <= p && p <= q && q <= b) return b - s;
  return Real(0);
}

inline double gain_from_trade(const PricePair& pp, const ValuationPair& v) {
  if (!pp.budget_balanced()) {
    throw std::invalid_argument("price pair violates budget balance (p > q)");
  }
  return basic_gain_from_trade(pp.p, pp.q, v.s, v.b);
}

inline double gain_from_trade(double price, const ValuationPair& v) {
  return basic_gain_from_trade(price, price, v.s, v.b);
}

inline double social_welfare(const PricePair& pp, const ValuationPair& v) {
  return v.s + gain_from_trade(pp, v);
}

// Sorted finite grid 0 = q_0 <= ... <= q_n = 1 with mesh max_i (q_i - q_{i-1}).
class PriceGrid {
 public:
  explicit PriceGrid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2) {
      throw std::invalid_argument("price grid needs at least the points 0 and 1");
    }
    if (points_.front() != 0.0 || points_.back() != 1.0) {
      throw std::invalid_argument("price grid must start at 0 and end at 1");
    }
    for (std::size_t i = 1; i < points_.size(); ++i) {
      if (!(points_[i - 1] <= points_[i])) {
        throw std::invalid_argument("price grid must be nondecreasing");
      }
      mesh_ = std::max(mesh_, points_[i] - points_[i - 1]);
    }
  }

  std::span<const double> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  double mesh() const { return mesh_; }

  // Half-open index range [first, last) of grid points inside [lo, hi].
  std::pair<std::size_t, std::size_t> index_range(double lo, double hi) const {
    if (hi < lo) return {0, 0};
    const auto first = std::lower_bound(points_.begin(), points_.end(), lo);
    const auto last = std::upper_bound(first, points_.end(), hi);
    return {static_cast<std::size_t>(first - points_.begin()),
            static_cast<std::size_t>(last - points_.begin())};
  }

 private:
  std::vector<double> points_;
  double mesh_ = 0.0;
};

inline PriceGrid uniform_grid(std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("uniform grid needs at least one step");
  std::vector<double> points(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    points[i] = static_cast<double>(i) / static_cast<double>(steps);
  }
  return PriceGrid(std::move(points));
}

class ValuationSequence {
 public:
  ValuationSequence() = default;
  explicit ValuationSequence(std::vector<ValuationPair> rounds) : rounds_(std::move(rounds)) {
    for (const auto& v : rounds_) {
      if (!v.in_unit_square()) {
        throw std::invalid_argument("valuation outside [0,1]: (" + std::to_string(v.s) +
                                    ", " + std::to_string(v.b) + ")");
      }
    }
  }

  std::size_t horizon() const { return rounds_.size(); }
  bool empty() const { return rounds_.empty(); }
  const ValuationPair& operator[](std::size_t t) const { return rounds_[t]; }
  std::span<const ValuationPair> rounds() const { return rounds_; }
  auto begin() const { return rounds_.begin(); }
  auto end() const { return rounds_.end(); }

 private:
  std::vector<ValuationPair> rounds_;
};

// Sum over rounds of GFT_t(price), accumulated in round order.
inline double total_gain(const ValuationSequence& seq, double price) {
  double total = 0.0;
  for (const auto& v : seq) total += gain_from_trade(price, v);
  return total;
}

struct PriceValue {
  double price = 0.0;
  double total_gft = 0.0;
};

namespace detail {

// Interval sweep: totals at each sorted candidate, O((T + K) log T).
inline std::vector<long double> sweep_totals(const ValuationSequence& seq,
                                             std::span<const double> sorted_points) {
  std::vector<std::pair<double, double>> starts;  // (s_t, width)
  std::vector<std::pair<double, double>> ends;    // (b_t, width)
  for (const auto& v : seq) {
    if (v.b < v.s) continue;
    starts.emplace_back(v.s, v.b - v.s);
    ends.emplace_back(v.b, v.b - v.s);
  }
  std::sort(starts.begin(), starts.end());
  std::sort(ends.begin(), ends.end());

  std::vector<long double> totals(sorted_points.size());
  long double running = 0.0L;
  std::size_t si = 0;
  std::size_t ei = 0;
  for (std::size_t k = 0; k < sorted_points.size(); ++k) {
    const double x = sorted_points[k];
    while (si < starts.size() && starts[si].first <= x) running += starts[si++].second;
    while (ei < ends.size() && ends[ei].first < x) running -= ends[ei++].second;
    totals[k] = running;
  }
  return totals;
}

// Picks the smallest point attaining the maximum of the per-round-ordered
// direct sum. The sweep narrows the field to near-maximal points; the direct
// sum then decides, so ties are broken on identical arithmetic.
inline PriceValue pick_best(const ValuationSequence& seq, std::span<const double> points,
                            const std::vector<long double>& swept) {
  const long double top = *std::max_element(swept.begin(), swept.end());
  const long double slack = 1e-9L * std::max<long double>(1.0L, top);
  PriceValue best{points.front(), -1.0};
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (swept[k] < top - slack) continue;
    if (k > 0 && points[k] == points[k - 1]) continue;
    const double value = total_gain(seq, points[k]);
    if (value > best.total_gft) best = {points[k], value};
  }
  return best;
}

}  // namespace detail

// Exact hindsight optimum over all single prices in [0,1]. The cumulative gain
// is piecewise constant with closed pieces starting and ending at the s_t and
// b_t, so the candidate set {s_t} U {b_t} attains the supremum. Ties go to the
// smallest price.
inline PriceValue best_fixed_price(const ValuationSequence& seq) {
  if (seq.empty()) throw std::invalid_argument("best_fixed_price: empty sequence");
  std::vector<double> candidates;
  candidates.reserve(2 * seq.horizon());
  for (const auto& v : seq) {
    candidates.push_back(v.s);
    candidates.push_back(v.b);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  return detail::pick_best(seq, candidates, detail::sweep_totals(seq, candidates));
}

// Best price restricted to the grid, smallest index on ties.
inline PriceValue best_grid_price(const ValuationSequence& seq, const PriceGrid& grid) {
  if (grid.size() == 0) throw std::invalid_argument("best_grid_price: empty grid");
  if (seq.empty()) return {grid[0], 0.0};
  return detail::pick_best(seq, grid.points(), detail::sweep_totals(seq, grid.points()));
}

struct DiscretizationCheck {
  double lhs = 0.0;  // sum_t GFT_t(p)
  double rhs = 0.0;  // 2 max_{q in Q} sum_t GFT_t(q) + mesh * T
  bool holds = false;
};

inline DiscretizationCheck evaluate_discretization_bound(const ValuationSequence& seq,
                                                         const PriceGrid& grid, double price) {
  DiscretizationCheck check;
  check.lhs = total_gain(seq, price);
  const double grid_best = seq.empty() ? 0.0 : best_grid_price(seq, grid).total_gft;
  check.rhs = 2.0 * grid_best + grid.mesh() * static_cast<double>(seq.horizon());
  // Relative guard against accumulated rounding in the two sums.
  check.holds = check.lhs <= check.rhs + 1e-12 * (1.0 + check.rhs);
  return check;
}

inline bool check_discretization_bound(const ValuationSequence& seq, const PriceGrid& grid,
                                       double price) {
  return evaluate_discretization_bound(seq, grid, price).holds;
}

inline double alpha_regret(double hindsight_total, std::span<const double> realized_gfts,
                           double alpha) {
  if (!(alpha >= 1.0)) throw std::invalid_argument("alpha must be >= 1");
  const double realized = std::accumulate(realized_gfts.begin(), realized_gfts.end(), 0.0);
  return hindsight_total - alpha * realized;
}

inline double alpha_regret(const ValuationSequence& seq, std::span<const double> realized_gfts,
                           double alpha) {
  if (realized_gfts.size() != seq.horizon()) {
    throw std::invalid_argument("alpha_regret: realized gains length differs from horizon");
  }
  if (!(alpha >= 1.0)) throw std::invalid_argument("alpha must be >= 1");
  return alpha_regret(best_fixed_price(seq).total_gft, realized_gfts, alpha);
}

// Exact E|S_T| for all T in [0, max_steps] of a symmetric +-1 walk, from
// successive binomial rows: E|S_T| = sum_k C(T,k) |2k - T| / 2^T.
inline std::vector<Rational> random_walk_abs_expectations(std::size_t max_steps) {
  std::vector<Rational> out(max_steps + 1);
  std::vector<BigInt> row{1};
  for (std::size_t T = 1; T <= max_steps; ++T) {
    std::vector<BigInt> next(T + 1);
    next[0] = 1;
    next[T] = 1;
    for (std::size_t k = 1; k < T; ++k) next[k] = row[k - 1] + row[k];
    row = std::move(next);
    BigInt weighted = 0;
    for (std::size_t k = 0; k <= T; ++k) {
      const long long distance =
          std::llabs(2 * static_cast<long long>(k) - static_cast<long long>(T));
      if (distance != 0) weighted += row[k] * distance;
    }
    out[T] = Rational(weighted, BigInt(1) << T);
  }
  return out;
}

inline Rational random_walk_abs_expectation(std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("random walk needs at least one step");
  return random_walk_abs_expectations(steps)[steps];
}

// Exact test of value >= coefficient * sqrt(n) for nonnegative coefficient.
inline bool at_least_sqrt_multiple(const Rational& value, const Rational& coefficient,
                                   std::size_t n) {
  if (value < 0) return false;
  return value * value >= coefficient * coefficient * Rational(BigInt(n));
}

}  // namespace bilateral

#endif  // BILATERAL_TRADE_CORE_HPP
