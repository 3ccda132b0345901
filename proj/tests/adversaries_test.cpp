#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "bilateral/adversaries.hpp"
#include "bilateral/feedback_env.hpp"
#include "bilateral/learners.hpp"

using namespace bilateral;

namespace {

Rational q(long long n, long long d = 1) { return make_rational(n, d); }

}  // namespace

// ---------------------------------------------------------------------------
// Nested thirds

TEST(NestedThirds, FirstStepExamples) {
  auto left = make_nested_thirds(0.1);
  const auto [ls, lb] = left.step(true);
  EXPECT_EQ(ls, 0.0);
  EXPECT_NEAR(lb, 0.45 + 0.1 / 3, 1e-15);

  auto right = make_nested_thirds(0.1);
  const auto [rs, rb] = right.step(false);
  EXPECT_NEAR(rs, 0.45 + 0.2 / 3, 1e-15);
  EXPECT_EQ(rb, 1.0);
}

TEST(NestedThirds, ExactFirstStepExamples) {
  auto left = make_nested_thirds(q(1, 10));
  EXPECT_EQ(left.step(true), std::make_pair(q(0), q(9, 20) + q(1, 30)));
  auto right = make_nested_thirds(q(1, 10));
  EXPECT_EQ(right.step(false), std::make_pair(q(9, 20) + q(2, 30), q(1)));
}

TEST(NestedThirds, RejectsBadDelta) {
  EXPECT_THROW(nested_thirds_adversary(0.0, 10, 1), std::invalid_argument);
  EXPECT_THROW(nested_thirds_adversary(1.0, 10, 1), std::invalid_argument);
  EXPECT_THROW(nested_thirds_adversary(-0.2, 10, 1), std::invalid_argument);
}

// Exact invariants over 60 rational steps: disjoint branches, gap delta/3^t,
// widths in [1/2 - delta/2, 1/2 + delta/2], every interval contains the final [c, d].
TEST(NestedThirds, ExactInvariants) {
  const Rational delta = q(1, 10);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Rng rng(seed);
    auto process = make_nested_thirds(delta);
    std::vector<std::pair<Rational, Rational>> emitted;
    Rational gap = delta;
    for (int t = 0; t < 60; ++t) {
      const auto branches = process.branches();
      ASSERT_LT(branches[0].second, branches[1].first);
      emitted.push_back(process.step(rng.uniform() < 0.5));
      gap /= 3;
      ASSERT_EQ(process.d() - process.c(), gap);
      ASSERT_FALSE(process.collapsed());
      const Rational width = emitted.back().second - emitted.back().first;
      ASSERT_GE(width, q(1, 2) - delta / 2);
      ASSERT_LE(width, q(1, 2) + delta / 2);
    }
    for (const auto& [s, b] : emitted) {
      ASSERT_LE(s, process.c());
      ASSERT_GE(b, process.d());
    }
  }
}

TEST(NestedThirds, ExactPathMatchesDoublePath) {
  const auto exact = nested_thirds_exact(q(1, 10), 25, 9);
  const auto seq = nested_thirds_adversary(0.1, 25, 9);
  for (std::size_t t = 0; t < 25; ++t) {
    EXPECT_NEAR(seq[t].s, to_double(exact[t].first), 1e-14);
    EXPECT_NEAR(seq[t].b, to_double(exact[t].second), 1e-14);
  }
}

TEST(NestedThirds, HindsightLowerBound) {
  const std::size_t T = 50;
  for (double delta : {0.1, 0.01, 0.5}) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto seq = nested_thirds_adversary(delta, T, seed);
      ASSERT_GE(best_fixed_price(seq).total_gft, (T / 2.0) * (1 - delta) - 1e-9)
          << "delta " << delta << " seed " << seed;
    }
  }
}

TEST(NestedThirds, DoubleStateCollapsesToCommonPoint) {
  Rng rng(4);
  auto process = make_nested_thirds(0.1);
  for (int t = 0; t < 20; ++t) process.step(rng.uniform() < 0.5);
  EXPECT_FALSE(process.collapsed());
  for (int t = 0; t < 60; ++t) process.step(rng.uniform() < 0.5);
  EXPECT_TRUE(process.collapsed());
  EXPECT_EQ(process.c(), process.d());
  const double c = process.c();
  EXPECT_EQ(process.step(true), std::make_pair(0.0, c));
  EXPECT_EQ(process.step(false), std::make_pair(c, 1.0));
}

TEST(NestedThirds, LongRunStaysNested) {
  const std::size_t T = 5000;
  const auto seq = nested_thirds_adversary(0.05, T, 11);
  double lo = 0.0;
  double hi = 1.0;
  for (const auto& v : seq) {
    lo = std::max(lo, v.s);
    hi = std::min(hi, v.b);
    ASSERT_LE(lo, hi);
  }
  EXPECT_GE(best_fixed_price(seq).total_gft, (T / 2.0) * 0.95 - 1e-9);
}

// ---------------------------------------------------------------------------
// Two copies

TEST(TwoCopy, RejectsBadDelta) {
  EXPECT_THROW(two_copy_adversary(0.0, 10, 1), std::invalid_argument);
  EXPECT_THROW(two_copy_adversary(0.25, 10, 1), std::invalid_argument);
}

TEST(TwoCopy, RangesAndWidths) {
  const double delta = 0.01;
  const auto seq = two_copy_adversary(delta, 2000, 3);
  for (const auto& v : seq) {
    const bool left = v.b <= 0.5 - delta;
    const bool right = v.s >= 0.5 + delta;
    ASSERT_TRUE(left != right);
    ASSERT_GE(v.b - v.s, 0.25 - delta - 1e-12);
    ASSERT_LE(v.b - v.s, 0.25 + delta + 1e-12);
  }
}

TEST(TwoCopy, FixedPriceTradesAtMostAQuarter) {
  const std::size_t T = 500;
  constexpr int kSeeds = 200;
  for (double price : {0.1, 0.2, 0.25, 0.5, 0.74, 0.75, 0.9}) {
    std::vector<double> freqs;
    for (int seed = 0; seed < kSeeds; ++seed) {
      const auto seq = two_copy_adversary(1.0 / T, T, seed);
      int trades = 0;
      for (const auto& v : seq) trades += (v.s <= price && price <= v.b) ? 1 : 0;
      freqs.push_back(trades / static_cast<double>(T));
    }
    const auto stats = mean_std(freqs);
    EXPECT_LE(stats.mean, 0.25 + 3 * stats.stddev / std::sqrt(kSeeds)) << "price " << price;
  }
}

// The hindsight price of the busier copy gains at least 1/4 - delta on each of
// its rounds, and E[max(N_L, N_R)] = T/2 + E|S_T|/2.
TEST(TwoCopy, HindsightChain) {
  const std::size_t T = 500;
  const double delta = 1.0 / T;
  const Rational walk = random_walk_abs_expectation(T);
  EXPECT_TRUE(at_least_sqrt_multiple(walk / 2, q(1, 3), T));
  const double per_round = 0.25 - delta;
  const double chain = per_round * (T / 2.0 + to_double(walk) / 2);

  constexpr int kSeeds = 400;
  std::vector<double> totals;
  for (int seed = 0; seed < kSeeds; ++seed) {
    const auto seq = two_copy_adversary(delta, T, seed);
    std::size_t left = 0;
    for (const auto& v : seq) left += v.b <= 0.5 ? 1 : 0;
    const double busier = static_cast<double>(std::max(left, T - left));
    const double best = best_fixed_price(seq).total_gft;
    ASSERT_GE(best, per_round * busier - 1e-9);
    totals.push_back(best);
  }
  const auto stats = mean_std(totals);
  EXPECT_GE(stats.mean, chain - 3 * stats.stddev / std::sqrt(kSeeds));
  EXPECT_GE(stats.mean, per_round * (T / 2.0 + std::sqrt(static_cast<double>(T)) / 3));
}

// ---------------------------------------------------------------------------
// Grid hiding

namespace {

GridHidingParams figure_params() { return {q(1, 10), q(1, 30)}; }

}  // namespace

TEST(GridHiding, ParameterValidation) {
  EXPECT_NO_THROW(figure_params().validate());
  EXPECT_THROW((GridHidingParams{q(1, 3), q(1, 7)}.validate()), std::invalid_argument);
  EXPECT_THROW((GridHidingParams{q(1, 10), q(1, 10)}.validate()), std::invalid_argument);
  EXPECT_THROW((GridHidingParams{q(2, 7), q(1, 7)}.validate()), std::invalid_argument);
  EXPECT_THROW(make_grid_hiding_instance(figure_params(), 10), std::invalid_argument);
}

TEST(GridHiding, FigureInstance) {
  const auto inst = make_grid_hiding_instance(figure_params(), 4);
  EXPECT_EQ(inst.support.size(), 30u);
  const std::set<RationalPair> support(inst.support.begin(), inst.support.end());
  EXPECT_EQ(support.size(), 30u);
  EXPECT_TRUE(support.count({q(2, 5), q(1, 2)}));
  EXPECT_TRUE(support.count({q(2, 5) + q(1, 30), q(2, 5) + q(1, 30)}));
  EXPECT_FALSE(support.count({q(2, 5), q(2, 5) + q(1, 30)}));
  EXPECT_TRUE(support.count({q(0), q(1, 30)}));
  EXPECT_TRUE(support.count({q(29, 30), q(1)}));
}

TEST(GridHiding, SupportSizesAcrossParameters) {
  for (const auto& params : {GridHidingParams{q(1, 2), q(1, 8)}, GridHidingParams{q(1, 4), q(1, 32)},
                             GridHidingParams{q(1, 6), q(1, 72)}}) {
    for (std::size_t i = 0; i < params.blocks(); ++i) {
      ASSERT_EQ(make_grid_hiding_instance(params, i).support.size(), params.support_size());
    }
  }
}

// For every off-grid price the two-bit feedback masses agree across hidden
// indices, and the trade mass is exactly delta.
TEST(GridHiding, OffGridFeedbackIsIndistinguishable) {
  const auto params = figure_params();
  for (long long k = 0; k < 30; ++k) {
    const Rational price = q(2 * k + 1, 60);
    const auto reference =
        single_price_feedback_masses(make_grid_hiding_instance(params, 0).support, price);
    EXPECT_EQ(reference.both, q(1, 30));
    EXPECT_EQ(reference.both + reference.seller_only + reference.buyer_only + reference.neither, q(1));
    for (std::size_t i = 1; i < params.blocks(); ++i) {
      const auto masses =
          single_price_feedback_masses(make_grid_hiding_instance(params, i).support, price);
      ASSERT_EQ(masses, reference) << "price " << to_string(price) << " hidden " << i;
    }
  }
}

TEST(GridHiding, HiddenBlockPriceEarnsDeltaTimesDelta) {
  const auto params = figure_params();
  for (std::size_t i = 0; i < params.blocks(); ++i) {
    const auto inst = make_grid_hiding_instance(params, i);
    const Rational inside = params.block_width * i + q(1, 60);
    EXPECT_EQ(expected_single_price_gain(inst.support, inside), q(1, 30) * q(1, 10));
    // A price in any other block only meets one delta-pair.
    const Rational outside = params.block_width * ((i + 1) % 10) + q(1, 60);
    EXPECT_EQ(expected_single_price_gain(inst.support, outside), q(1, 30) * q(1, 30));
  }
}

TEST(GridHiding, AlphaTargeting) {
  const auto two = GridHidingParams::for_alpha(q(2));
  EXPECT_EQ(two.block_width, q(1, 4));
  EXPECT_EQ(two.cell_width, q(1, 32));
  const auto three = GridHidingParams::for_alpha(q(3));
  EXPECT_EQ(three.block_width, q(1, 6));
  EXPECT_EQ(three.cell_width, q(1, 72));
  EXPECT_NO_THROW(GridHidingParams::for_alpha(q(3, 2)));  // Delta 1/3, delta 1/18
  EXPECT_THROW(GridHidingParams::for_alpha(q(5, 4)), std::invalid_argument);
}

TEST(GridHiding, DrawsComeFromTheSupport) {
  const auto params = figure_params();
  const auto draw = draw_grid_hiding(params, 3000, 21, false);
  const auto inst = make_grid_hiding_instance(params, draw.hidden);
  std::set<std::pair<double, double>> support;
  for (const auto& [s, b] : inst.support) support.insert({to_double(s), to_double(b)});
  std::set<std::pair<double, double>> seen;
  for (const auto& v : draw.sequence) {
    ASSERT_TRUE(support.count({v.s, v.b}));
    seen.insert({v.s, v.b});
  }
  EXPECT_EQ(seen.size(), 30u);  // 3000 draws over 30 cells
}

TEST(GridHiding, PerturbationHalvesAndShifts) {
  const auto params = figure_params();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto plain = draw_grid_hiding(params, 200, seed, false);
    const auto shifted = draw_grid_hiding(params, 200, seed, true);
    ASSERT_GE(shifted.shift, 0.0);
    ASSERT_LE(shifted.shift, 0.5);
    ASSERT_EQ(plain.hidden, shifted.hidden);
    for (const auto& v : shifted.sequence) ASSERT_TRUE(v.in_unit_square());
    const auto inst = make_grid_hiding_instance(params, shifted.hidden);
    for (const auto& v : shifted.sequence) {
      bool found = false;
      for (const auto& [s, b] : inst.support) {
        found = found || (std::abs(v.s - (to_double(s) / 2 + shifted.shift)) < 1e-15 &&
                          std::abs(v.b - (to_double(b) / 2 + shifted.shift)) < 1e-15);
      }
      ASSERT_TRUE(found);
    }
  }
}

TEST(GridHiding, HiddenIndexIsUniform) {
  const auto params = figure_params();
  std::vector<int> counts(10, 0);
  constexpr int kDraws = 5000;
  for (int seed = 0; seed < kDraws; ++seed) ++counts[draw_grid_hiding(params, 1, seed).hidden];
  const double sigma = std::sqrt(kDraws * 0.1 * 0.9);
  for (int c : counts) EXPECT_NEAR(c, kDraws * 0.1, 4 * sigma);
}

TEST(GridHiding, Reproducible) {
  const auto a = grid_hiding_adversary(figure_params(), 100, 5);
  const auto b = grid_hiding_adversary(figure_params(), 100, 5);
  for (std::size_t t = 0; t < 100; ++t) {
    EXPECT_EQ(a[t].s, b[t].s);
    EXPECT_EQ(a[t].b, b[t].b);
  }
}

// ---------------------------------------------------------------------------
// Four outcomes

namespace {

// Hand-derived E[GFT(p)] table, regions split at 1/3, 1/2, 2/3.
Rational four_outcome_table(FourOutcomeSide side, const Rational& eps, const Rational& p) {
  const bool first = side == FourOutcomeSide::First;
  if (p < q(1, 3)) return first ? q(1, 8) + eps / 2 : q(1, 8);
  if (p < q(1, 2)) return first ? q(1, 6) + eps / 3 : q(1, 6);
  if (p == q(1, 2)) return q(1, 3) + eps / 3;
  if (p <= q(2, 3)) return first ? q(1, 6) : q(1, 6) + eps / 3;
  return first ? q(1, 8) : q(1, 8) + eps / 2;
}

}  // namespace

TEST(FourOutcome, ExpectedGainTable) {
  for (const Rational& eps : {q(1, 100), q(1, 8), q(1, 4)}) {
    for (auto side : {FourOutcomeSide::First, FourOutcomeSide::Second}) {
      const FourOutcomeInstance inst{side, eps};
      Rational total = 0;
      for (const auto& p : inst.probabilities()) {
        ASSERT_GE(p, 0);
        total += p;
      }
      ASSERT_EQ(total, 1);
      for (long long k = 0; k <= 120; ++k) {
        const Rational p = q(k, 120);
        ASSERT_EQ(inst.expected_gain(p), four_outcome_table(side, eps, p))
            << "price " << to_string(p);
      }
    }
  }
}

TEST(FourOutcome, SpecExamples) {
  const Rational eps = q(1, 20);
  const FourOutcomeInstance first{FourOutcomeSide::First, eps};
  const FourOutcomeInstance second{FourOutcomeSide::Second, eps};
  EXPECT_EQ(first.expected_gain(q(2, 5)), q(1, 6) + eps / 3);
  EXPECT_EQ(first.expected_gain(q(1, 2)), q(1, 3) + eps / 3);
  EXPECT_EQ(first.trade_probability(q(1, 3)), q(1, 2));
  EXPECT_EQ(second.trade_probability(q(1, 3)), q(1, 2));
  EXPECT_EQ(first.trade_probability(q(0)), q(1, 4) + eps);
  EXPECT_EQ(second.trade_probability(q(0)), q(1, 4));
}

TEST(FourOutcome, RejectsLargeEpsilon) {
  EXPECT_THROW((FourOutcomeInstance{FourOutcomeSide::First, q(3, 10)}.probabilities()),
               std::invalid_argument);
  EXPECT_THROW(four_outcome_adversary(0.3, 0.0, 10, 1), std::invalid_argument);
  EXPECT_THROW(four_outcome_adversary(0.1, -0.1, 10, 1), std::invalid_argument);
}

TEST(FourOutcome, DrawFrequenciesAndPerturbation) {
  const std::size_t T = 100000;
  const double eps = 0.1;
  const auto plain = draw_four_outcome(eps, 0.0, T, 17);
  const std::vector<double> want = plain.side == FourOutcomeSide::First
                                       ? std::vector<double>{0.35, 0.15, 0.25, 0.25}
                                       : std::vector<double>{0.25, 0.25, 0.15, 0.35};
  std::vector<int> counts(4, 0);
  for (const auto& v : plain.sequence) {
    if (v.s == 0.0) ++counts[0];
    else if (v.b == 0.5) ++counts[1];
    else if (v.b < 1.0) ++counts[2];
    else ++counts[3];
  }
  for (std::size_t k = 0; k < 4; ++k) {
    const double sigma = std::sqrt(want[k] * (1 - want[k]) / T);
    EXPECT_NEAR(counts[k] / static_cast<double>(T), want[k], 3 * sigma);
  }

  const double pert = 0.2;
  const auto shifted = draw_four_outcome(eps, pert, 500, 17);
  EXPECT_GE(shifted.shift, 0.0);
  EXPECT_LE(shifted.shift, pert);
  for (const auto& v : shifted.sequence) {
    ASSERT_TRUE(v.in_unit_square());
    ASSERT_GE(v.s, shifted.shift / (1 + pert) - 1e-15);
  }
}

TEST(FourOutcome, BothSidesOccur) {
  int first = 0;
  for (int seed = 0; seed < 400; ++seed) {
    first += draw_four_outcome(0.1, 0.0, 1, seed).side == FourOutcomeSide::First ? 1 : 0;
  }
  EXPECT_NEAR(first, 200, 4 * 10);
}

// ---------------------------------------------------------------------------
// I.i.d. finite support

TEST(IidFinite, SingleOutcomeIsConstant) {
  const std::vector<WeightedValuation> support{{{0.3, 0.7}, 1.0}};
  const auto seq = iid_finite_adversary(support, 100, 1);
  for (const auto& v : seq) {
    ASSERT_EQ(v.s, 0.3);
    ASSERT_EQ(v.b, 0.7);
  }
}

TEST(IidFinite, TwoOutcomeFrequencies) {
  const std::vector<WeightedValuation> support{{{0.1, 0.2}, 0.5}, {{0.6, 0.9}, 0.5}};
  const std::size_t T = 100000;
  const auto seq = iid_finite_adversary(support, T, 2);
  std::size_t first = 0;
  for (const auto& v : seq) first += v.s == 0.1 ? 1 : 0;
  EXPECT_NEAR(first / static_cast<double>(T), 0.5, 3 * std::sqrt(0.25 / T));
}

TEST(IidFinite, ReproducibleAndSeedSensitive) {
  const std::vector<WeightedValuation> support{{{0.1, 0.2}, 0.3}, {{0.6, 0.9}, 0.7}};
  const auto a = iid_finite_adversary(support, 200, 3);
  const auto b = iid_finite_adversary(support, 200, 3);
  const auto c = iid_finite_adversary(support, 200, 4);
  bool differs = false;
  for (std::size_t t = 0; t < 200; ++t) {
    ASSERT_EQ(a[t].s, b[t].s);
    differs = differs || a[t].s != c[t].s;
  }
  EXPECT_TRUE(differs);
}

TEST(IidFinite, RejectsBadProbabilities) {
  const std::vector<WeightedValuation> short_sum{{{0.1, 0.2}, 0.5}, {{0.6, 0.9}, 0.4}};
  EXPECT_THROW(iid_finite_adversary(short_sum, 10, 1), std::invalid_argument);
  const std::vector<WeightedValuation> negative{{{0.1, 0.2}, 1.5}, {{0.6, 0.9}, -0.5}};
  EXPECT_THROW(iid_finite_adversary(negative, 10, 1), std::invalid_argument);
  const std::vector<WeightedValuation> outside{{{0.1, 1.2}, 1.0}};
  EXPECT_THROW(iid_finite_adversary(outside, 10, 1), std::invalid_argument);
  EXPECT_THROW(iid_finite_adversary({}, 10, 1), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Valuation files

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << body;
  return path.string();
}

}  // namespace

TEST(ValuationCsv, ReadsRowsAndSkipsHeader) {
  const auto path = write_temp("bilateral_vals.csv", "s,b\n0.1,0.9\n\n0.5,0.25\r\n");
  const auto seq = load_valuation_csv(path);
  ASSERT_EQ(seq.horizon(), 2u);
  EXPECT_EQ(seq[0].s, 0.1);
  EXPECT_EQ(seq[1].b, 0.25);
}

TEST(ValuationCsv, Errors) {
  EXPECT_THROW(load_valuation_csv("/nonexistent/vals.csv"), std::runtime_error);
  EXPECT_THROW(load_valuation_csv(write_temp("bilateral_bad.csv", "0.1,0.9\nx,y\n")),
               std::runtime_error);
  EXPECT_THROW(load_valuation_csv(write_temp("bilateral_range.csv", "0.1,1.9\n")),
               std::invalid_argument);
}
