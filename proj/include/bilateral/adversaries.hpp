#ifndef BILATERAL_ADVERSARIES_HPP
#define BILATERAL_ADVERSARIES_HPP

#include <algorithm>
#include <span>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bilateral/rational.hpp"
#include "bilateral/rng.hpp"
#include "bilateral/trade_core.hpp"

// Oblivious valuation-sequence generators. Every generator is a pure function
// of (parameters, seed); none of them ever sees a learner action.

namespace bilateral {

// ---------------------------------------------------------------------------
// Nested thirds.
//
// State [c, d] inside an emission range [lo, hi]. Each step a fair coin picks
//   LEFT:  d <- c + (d - c)/3,   emit (lo, d)
//   RIGHT: c <- c + 2(d - c)/3,  emit (c, hi)
// so the two candidate intervals [lo, c + (d-c)/3] and [c + 2(d-c)/3, hi] are
// disjoint and every emitted interval contains the final [c, d].
//
// With floating point the gap eventually falls below the spacing of
// representable numbers around c. From then on the state collapses to d = c
// and both branches emit the common point c. Rational instantiations never
// collapse.
template <class Real>
class NestedThirdsProcess {
 public:
  NestedThirdsProcess(Real lo, Real hi, Real c, Real d)
      : lo_(std::move(lo)), hi_(std::move(hi)), c_(std::move(c)), d_(std::move(d)) {}

  const Real& c() const { return c_; }
  const Real& d() const { return d_; }
  bool collapsed() const { return collapsed_; }

  // Candidate next intervals for the current state: {left, right}.
  std::array<std::pair<Real, Real>, 2> branches() const {
    if (collapsed_) return {{{lo_, c_}, {c_, hi_}}};
    const Real third = (d_ - c_) / 3;
    return {{{lo_, Real(c_ + third)}, {Real(c_ + third + third), hi_}}};
  }

  std::pair<Real, Real> step(bool left) {
    if (!collapsed_) {
      const Real third = (d_ - c_) / 3;
      const Real new_d = c_ + third;
      const Real new_c = c_ + third + third;
      if (c_ < new_d && new_d < new_c && new_c < d_) {
        if (left) {
          d_ = new_d;
        } else {
          c_ = new_c;
        }
      } else {
        collapsed_ = true;
        d_ = c_;
      }
    }
    if (collapsed_) return left ? std::pair<Real, Real>{lo_, c_} : std::pair<Real, Real>{c_, hi_};
    return left ? std::pair<Real, Real>{lo_, d_} : std::pair<Real, Real>{c_, hi_};
  }

 private:
  Real lo_;
  Real hi_;
  Real c_;
  Real d_;
  bool collapsed_ = false;
};

// Starts at c = 1/2 - delta/2, d = 1/2 + delta/2 on the range [0, 1].
template <class Real>
NestedThirdsProcess<Real> make_nested_thirds(const Real& delta) {
  const Real half = Real(1) / 2;
  return NestedThirdsProcess<Real>(Real(0), Real(1), half - delta / 2, half + delta / 2);
}

inline void require_nested_thirds_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("nested-thirds: delta must lie in (0, 1)");
  }
}

inline ValuationSequence nested_thirds_adversary(double delta, std::size_t horizon,
                                                 std::uint64_t seed) {
  require_nested_thirds_delta(delta);
  Rng rng(seed);
  auto process = make_nested_thirds(delta);
  std::vector<ValuationPair> rounds;
  rounds.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto [s, b] = process.step(rng.uniform() < 0.5);
    rounds.push_back({s, b});
  }
  return ValuationSequence(std::move(rounds));
}

// Rational path of the same construction and coin stream, for exact checks.
inline std::vector<std::pair<Rational, Rational>> nested_thirds_exact(const Rational& delta,
                                                                      std::size_t horizon,
                                                                      std::uint64_t seed) {
  Rng rng(seed);
  auto process = make_nested_thirds(delta);
  std::vector<std::pair<Rational, Rational>> out;
  out.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) out.push_back(process.step(rng.uniform() < 0.5));
  return out;
}

// ---------------------------------------------------------------------------
// Two scaled copies of nested thirds on [0, 1/2 - delta] and [1/2 + delta, 1],
// started at [1/4 - delta, 1/4] and [3/4, 3/4 + delta]. Both copies advance
// every round with their own fair coin; a third fair coin picks which copy's
// pair is emitted.

inline void require_two_copy_delta(double delta) {
  if (!(delta > 0.0 && delta < 0.25)) {
    throw std::invalid_argument("two-copy: delta must lie in (0, 1/4)");
  }
}

inline ValuationSequence two_copy_adversary(double delta, std::size_t horizon,
                                            std::uint64_t seed) {
  require_two_copy_delta(delta);
  Rng rng(seed);
  NestedThirdsProcess<double> left_copy(0.0, 0.5 - delta, 0.25 - delta, 0.25);
  NestedThirdsProcess<double> right_copy(0.5 + delta, 1.0, 0.75, 0.75 + delta);
  std::vector<ValuationPair> rounds;
  rounds.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto left_pair = left_copy.step(rng.uniform() < 0.5);
    const auto right_pair = right_copy.step(rng.uniform() < 0.5);
    const auto& chosen = rng.uniform() < 0.5 ? left_pair : right_pair;
    rounds.push_back({chosen.first, chosen.second});
  }
  return ValuationSequence(std::move(rounds));
}

// ---------------------------------------------------------------------------
// Grid hiding.
//
// For a hidden block index i the support S_i holds
//   the wide pair (i Delta, (i+1) Delta),
//   every delta-pair (j Delta + k delta, j Delta + (k+1) delta) of blocks j != i,
//   the degenerate pairs (i Delta + k delta, i Delta + k delta), k = 1..Delta/delta - 1,
// for 1/delta pairs in total. Stored exactly.

using RationalPair = std::pair<Rational, Rational>;

inline bool is_integer(const Rational& r) { return boost::multiprecision::denominator(r) == 1; }

inline std::size_t to_size(const Rational& integral) {
  return boost::multiprecision::numerator(integral).convert_to<std::size_t>();
}

struct GridHidingParams {
  Rational block_width;  // Delta
  Rational cell_width;   // delta

  std::size_t blocks() const { return to_size(Rational(1) / block_width); }
  std::size_t cells_per_block() const { return to_size(block_width / cell_width); }
  std::size_t support_size() const { return to_size(Rational(1) / cell_width); }

  void validate() const {
    if (!(cell_width > 0 && cell_width < block_width && block_width <= 1)) {
      throw std::invalid_argument("grid-hiding: need 0 < delta < Delta <= 1");
    }
    if (!is_integer(Rational(1) / block_width) || !is_integer(Rational(1) / cell_width) ||
        !is_integer(block_width / cell_width)) {
      throw std::invalid_argument("grid-hiding: 1/Delta, 1/delta and Delta/delta must be integers");
    }
  }

  // Delta = 1/(2 alpha), delta = 1/(8 alpha^2).
  static GridHidingParams for_alpha(const Rational& alpha) {
    GridHidingParams params{Rational(1) / (2 * alpha), Rational(1) / (8 * alpha * alpha)};
    params.validate();
    return params;
  }
};

struct GridHidingInstance {
  GridHidingParams params;
  std::size_t hidden = 0;
  std::vector<RationalPair> support;
};

inline GridHidingInstance make_grid_hiding_instance(const GridHidingParams& params,
                                                    std::size_t hidden) {
  params.validate();
  const std::size_t blocks = params.blocks();
  const std::size_t cells = params.cells_per_block();
  if (hidden >= blocks) throw std::invalid_argument("grid-hiding: hidden index out of range");
  const Rational& Delta = params.block_width;
  const Rational& delta = params.cell_width;

  GridHidingInstance inst{params, hidden, {}};
  inst.support.reserve(params.support_size());
  const Rational base = Delta * hidden;
  inst.support.emplace_back(base, base + Delta);
  for (std::size_t j = 0; j < blocks; ++j) {
    if (j == hidden) continue;
    for (std::size_t k = 0; k < cells; ++k) {
      const Rational lo = Delta * j + delta * k;
      inst.support.emplace_back(lo, lo + delta);
    }
  }
  for (std::size_t k = 1; k < cells; ++k) {
    const Rational point = base + delta * k;
    inst.support.emplace_back(point, point);
  }
  return inst;
}

// Exact masses of the two-bit feedback of a single price p under a uniform
// draw from the support.
struct FeedbackMasses {
  Rational both;         // (1,1)
  Rational seller_only;  // (1,0)
  Rational buyer_only;   // (0,1)
  Rational neither;      // (0,0)

  friend bool operator==(const FeedbackMasses&, const FeedbackMasses&) = default;
};

inline FeedbackMasses single_price_feedback_masses(std::span<const RationalPair> support,
                                                   const Rational& price) {
  FeedbackMasses m;
  const Rational unit = Rational(1) / Rational(BigInt(support.size()));
  for (const auto& [s, b] : support) {
    const bool seller = s <= price;
    const bool buyer = price <= b;
    if (seller && buyer) m.both += unit;
    else if (seller) m.seller_only += unit;
    else if (buyer) m.buyer_only += unit;
    else m.neither += unit;
  }
  return m;
}

inline Rational expected_single_price_gain(std::span<const RationalPair> support,
                                           const Rational& price) {
  Rational total = 0;
  for (const auto& [s, b] : support) total += basic_gain_from_trade(price, price, s, b);
  return total / Rational(BigInt(support.size()));
}

struct GridHidingDraw {
  std::size_t hidden = 0;
  double shift = 0.0;
  ValuationSequence sequence;
};

// Draws the hidden index, then T i.i.d. uniform pairs from S_i. When perturb is
// set every value v becomes v/2 + x with one shift x uniform on [0, 1/2].
inline GridHidingDraw draw_grid_hiding(const GridHidingParams& params, std::size_t horizon,
                                       std::uint64_t seed, bool perturb = true) {
  params.validate();
  Rng rng(seed);
  GridHidingDraw out;
  out.hidden = static_cast<std::size_t>(rng.below(params.blocks()));
  out.shift = perturb ? 0.5 * rng.uniform_closed() : 0.0;
  const auto inst = make_grid_hiding_instance(params, out.hidden);
  std::vector<ValuationPair> support;
  for (const auto& [s, b] : inst.support) {
    const double sd = to_double(s);
    const double bd = to_double(b);
    support.push_back(perturb ? ValuationPair{0.5 * sd + out.shift, 0.5 * bd + out.shift}
                              : ValuationPair{sd, bd});
  }
  std::vector<ValuationPair> rounds;
  rounds.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) rounds.push_back(support[rng.below(support.size())]);
  out.sequence = ValuationSequence(std::move(rounds));
  return out;
}

inline ValuationSequence grid_hiding_adversary(const GridHidingParams& params,
                                               std::size_t horizon, std::uint64_t seed) {
  return draw_grid_hiding(params, horizon, seed).sequence;
}

// ---------------------------------------------------------------------------
// Four-outcome instance over {(0,1/2), (1/3,1/2), (1/2,2/3), (1/2,1)}.
//   first side:  1/4 + eps, 1/4 - eps, 1/4, 1/4
//   second side: 1/4, 1/4, 1/4 - eps, 1/4 + eps

enum class FourOutcomeSide { First, Second };

struct FourOutcomeInstance {
  FourOutcomeSide side = FourOutcomeSide::First;
  Rational epsilon;

  std::array<RationalPair, 4> outcomes() const {
    return {{{Rational(0), make_rational(1, 2)},
             {make_rational(1, 3), make_rational(1, 2)},
             {make_rational(1, 2), make_rational(2, 3)},
             {make_rational(1, 2), Rational(1)}}};
  }

  std::array<Rational, 4> probabilities() const {
    if (!(epsilon > 0 && epsilon <= make_rational(1, 4))) {
      throw std::invalid_argument("four-outcome: epsilon must lie in (0, 1/4]");
    }
    const Rational quarter = make_rational(1, 4);
    if (side == FourOutcomeSide::First) {
      return {quarter + epsilon, quarter - epsilon, quarter, quarter};
    }
    return {quarter, quarter, quarter - epsilon, quarter + epsilon};
  }

  // E[GFT(p)] for a single price p.
  Rational expected_gain(const Rational& price) const {
    const auto outs = outcomes();
    const auto probs = probabilities();
    Rational total = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      total += probs[k] * basic_gain_from_trade(price, price, outs[k].first, outs[k].second);
    }
    return total;
  }

  // P(trade) when posting the single price p.
  Rational trade_probability(const Rational& price) const {
    const auto outs = outcomes();
    const auto probs = probabilities();
    Rational total = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      if (outs[k].first <= price && price <= outs[k].second) total += probs[k];
    }
    return total;
  }
};

// ---------------------------------------------------------------------------

// Categorical sampling from a finite support; probabilities must be
// nonnegative and sum to 1 within 1e-12, and are renormalized.
class CategoricalSampler {
 public:
  explicit CategoricalSampler(std::span<const double> probabilities) {
    if (probabilities.empty()) throw std::invalid_argument("categorical: empty support");
    double sum = 0.0;
    for (double p : probabilities) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw std::invalid_argument("categorical: probabilities must be nonnegative");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw std::invalid_argument("categorical: probabilities must sum to 1");
    }
    cumulative_.reserve(probabilities.size());
    double running = 0.0;
    for (double p : probabilities) {
      running += p / sum;
      cumulative_.push_back(running);
    }
    cumulative_.back() = 1.0;
  }

  std::size_t operator()(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cumulative_.begin(), static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
  }

 private:
  std::vector<double> cumulative_;
};

struct WeightedValuation {
  ValuationPair valuation;
  double probability = 0.0;
};

inline ValuationSequence iid_finite_adversary(std::span<const WeightedValuation> support,
                                              std::size_t horizon, std::uint64_t seed) {
  std::vector<double> probs;
  for (const auto& w : support) {
    if (!w.valuation.in_unit_square()) throw std::invalid_argument("iid: valuation outside [0,1]");
    probs.push_back(w.probability);
  }
  const CategoricalSampler sampler(probs);
  Rng rng(seed);
  std::vector<ValuationPair> rounds;
  rounds.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) rounds.push_back(support[sampler(rng)].valuation);
  return ValuationSequence(std::move(rounds));
}

struct FourOutcomeDraw {
  FourOutcomeSide side = FourOutcomeSide::First;
  double shift = 0.0;
  ValuationSequence sequence;
};

// Side uniform, then T i.i.d. draws, then v <- (v + x)/(1 + delta_pert) with one
// shift x uniform on [0, delta_pert].
inline FourOutcomeDraw draw_four_outcome(double epsilon, double delta_pert, std::size_t horizon,
                                         std::uint64_t seed) {
  if (!(epsilon > 0.0 && epsilon <= 0.25)) {
    throw std::invalid_argument("four-outcome: epsilon must lie in (0, 1/4]");
  }
  if (!(delta_pert >= 0.0)) throw std::invalid_argument("four-outcome: delta_pert must be >= 0");
  Rng rng(seed);
  FourOutcomeDraw out;
  out.side = rng.uniform() < 0.5 ? FourOutcomeSide::First : FourOutcomeSide::Second;
  out.shift = delta_pert * rng.uniform_closed();
  const std::array<double, 4> probs =
      out.side == FourOutcomeSide::First
          ? std::array<double, 4>{0.25 + epsilon, 0.25 - epsilon, 0.25, 0.25}
          : std::array<double, 4>{0.25, 0.25, 0.25 - epsilon, 0.25 + epsilon};
  const std::array<ValuationPair, 4> outcomes{
      {{0.0, 0.5}, {1.0 / 3.0, 0.5}, {0.5, 2.0 / 3.0}, {0.5, 1.0}}};
  const double scale = 1.0 + delta_pert;
  std::array<ValuationPair, 4> shifted;
  for (std::size_t k = 0; k < 4; ++k) {
    shifted[k] = {std::min(1.0, (outcomes[k].s + out.shift) / scale),
                  std::min(1.0, (outcomes[k].b + out.shift) / scale)};
  }
  const CategoricalSampler sampler(probs);
  std::vector<ValuationPair> rounds;
  rounds.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) rounds.push_back(shifted[sampler(rng)]);
  out.sequence = ValuationSequence(std::move(rounds));
  return out;
}

inline ValuationSequence four_outcome_adversary(double epsilon, double delta_pert,
                                                std::size_t horizon, std::uint64_t seed) {
  return draw_four_outcome(epsilon, delta_pert, horizon, seed).sequence;
}

// ---------------------------------------------------------------------------

// CSV of "s,b" rows; a first line that does not parse as numbers is a header.
inline ValuationSequence load_valuation_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open valuation file '" + path + "'");
  std::vector<ValuationPair> rounds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto comma = line.find(',');
    double s = 0.0;
    double b = 0.0;
    bool ok = comma != std::string::npos;
    if (ok) {
      try {
        std::size_t used = 0;
        s = std::stod(line.substr(0, comma), &used);
        b = std::stod(line.substr(comma + 1), &used);
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok) {
      if (line_no == 1) continue;
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 's,b'");
    }
    rounds.push_back({s, b});
  }
  return ValuationSequence(std::move(rounds));
}

}  // namespace bilateral

#endif  // BILATERAL_ADVERSARIES_HPP
