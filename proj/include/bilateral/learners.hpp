#ifndef BILATERAL_LEARNERS_HPP
#define BILATERAL_LEARNERS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bilateral/feedback_env.hpp"
#include "bilateral/rng.hpp"
#include "bilateral/trade_core.hpp"

namespace bilateral {

inline void require_unit_price(double p, const char* who) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(who) + ": price must lie in [0,1]");
  }
}

// Multiplicative Weights over K experts, gains form: w_i <- w_i (1 + eta g_i)
// with g_i in [0,1].
//
// Log-weights are the state (always finite, hence every weight is strictly
// positive). A rescaled linear copy serves sampling; its entries may underflow
// to zero for experts that are astronomically behind, which only affects
// probabilities below double resolution.
class MultiplicativeWeights {
 public:
  MultiplicativeWeights(std::size_t experts, double eta)
      : eta_(eta), log_weights_(experts, 0.0), linear_(experts, 1.0) {
    if (experts == 0) throw std::invalid_argument("MW needs at least one expert");
    if (!(eta > 0.0)) throw std::invalid_argument("MW learning rate must be positive");
  }

  std::size_t size() const { return log_weights_.size(); }
  double eta() const { return eta_; }
  std::span<const double> log_weights() const { return log_weights_; }

  std::vector<double> probabilities() const {
    const double total = std::accumulate(linear_.begin(), linear_.end(), 0.0);
    std::vector<double> out(linear_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = linear_[i] / total;
    return out;
  }

  std::size_t sample(Rng& rng) const {
    const double total = std::accumulate(linear_.begin(), linear_.end(), 0.0);
    const double target = rng.uniform() * total;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < linear_.size(); ++i) {
      cumulative += linear_[i];
      if (target < cumulative) return i;
    }
    // Rounding left target at the total: take the last expert with mass.
    for (std::size_t i = linear_.size(); i-- > 0;) {
      if (linear_[i] > 0.0) return i;
    }
    return linear_.size() - 1;
  }

  void update(std::span<const double> gains) {
    if (gains.size() != size()) throw std::invalid_argument("MW update: wrong gain count");
    for (std::size_t i = 0; i < gains.size(); ++i) {
      if (gains[i] == 0.0) continue;
      log_weights_[i] += std::log1p(eta_ * gains[i]);
      linear_[i] *= 1.0 + eta_ * gains[i];
    }
    rescale_if_needed();
  }

  // Same gain for every expert in [first, last), zero elsewhere.
  void update_range(std::size_t first, std::size_t last, double gain) {
    if (first >= last || gain == 0.0) return;
    const double step = std::log1p(eta_ * gain);
    const double factor = 1.0 + eta_ * gain;
    for (std::size_t i = first; i < last; ++i) {
      log_weights_[i] += step;
      linear_[i] *= factor;
    }
    rescale_if_needed();
  }

 private:
  void rescale_if_needed() {
    const double top = *std::max_element(linear_.begin(), linear_.end());
    if (top < 1e200) return;
    for (double& w : linear_) w *= 1e-200;
  }

  double eta_;
  std::vector<double> log_weights_;
  std::vector<double> linear_;
};

// ---------------------------------------------------------------------------

// Posts (p, p) every round and ignores feedback.
class FixedPriceLearner final : public Learner {
 public:
  explicit FixedPriceLearner(double price) : price_(price) {
    require_unit_price(price, "fixed-price learner");
  }
  std::string name() const override { return "fixed"; }
  void reset(const EpisodeSeeds&) override {}
  PricePair act(std::size_t) override { return PricePair::single(price_); }
  void observe(const Feedback&) override {}

 private:
  double price_;
};

// Posts an independent uniform single price each round.
class RandomUniformLearner final : public Learner {
 public:
  std::string name() const override { return "random-uniform"; }
  void reset(const EpisodeSeeds& seeds) override { rng_.reseed(seeds.learner); }
  PricePair act(std::size_t) override { return PricePair::single(rng_.uniform_closed()); }
  void observe(const Feedback&) override {}

 private:
  Rng rng_;
};

inline double mw_default_eta(std::size_t horizon) {
  const double T = static_cast<double>(std::max<std::size_t>(horizon, 2));
  return std::sqrt(std::log(T) / static_cast<double>(std::max<std::size_t>(horizon, 1)));
}

// Experts over a price grid under full feedback. Every round it samples a grid
// price from the normalized weights; once (s, b) is revealed every grid price
// q in [s, b] gains b - s and all others gain zero.
class MwFullFeedbackLearner final : public Learner {
 public:
  MwFullFeedbackLearner(std::size_t horizon, PriceGrid grid, double eta)
      : horizon_(horizon), grid_(std::move(grid)), eta_(eta), weights_(grid_.size(), eta) {}

  // Default grid uniform_grid(T) and eta = sqrt(log T / T).
  explicit MwFullFeedbackLearner(std::size_t horizon)
      : MwFullFeedbackLearner(horizon, uniform_grid(std::max<std::size_t>(horizon, 1)),
                              mw_default_eta(horizon)) {}

  std::string name() const override { return "mw-full"; }

  void configure(const ProtocolConfig& config) override {
    if (config.feedback != FeedbackModel::Full) {
      throw ConfigError("mw-full requires full feedback, got " + to_string(config.feedback));
    }
  }

  void reset(const EpisodeSeeds& seeds) override {
    rng_.reseed(seeds.learner);
    weights_ = MultiplicativeWeights(grid_.size(), eta_);
  }

  PricePair act(std::size_t) override {
    return PricePair::single(grid_[weights_.sample(rng_)]);
  }

  void observe(const Feedback& feedback) override {
    const auto* full = std::get_if<FullFeedback>(&feedback);
    if (full == nullptr) throw ConfigError("mw-full received non-full feedback");
    if (full->b < full->s) return;
    const auto [first, last] = grid_.index_range(full->s, full->b);
    weights_.update_range(first, last, full->b - full->s);
  }

  const MultiplicativeWeights& weights() const { return weights_; }
  const PriceGrid& grid() const { return grid_; }
  std::size_t horizon() const { return horizon_; }

 private:
  std::size_t horizon_;
  PriceGrid grid_;
  double eta_;
  MultiplicativeWeights weights_;
  Rng rng_;
};

// ---------------------------------------------------------------------------
// Two-price, one-bit estimator of GFT(p).
//
// Heads (probability p): post (U, p) with U uniform on [0, p].
// Tails: post (p, V) with V uniform on [p, 1].
// The returned one-bit feedback has expectation exactly GFT(p) = (b - s) 1{s <= p <= b}:
// p (p - s)/p + (1 - p)(b - p)/(1 - p) = b - s when p is in [s, b], and 0 otherwise.

struct EstimatorDraw {
  bool head = false;
  double aux = 0.0;  // U on heads, V on tails
  PricePair pair;
};

inline EstimatorDraw draw_estimator(double price, Rng& rng) {
  require_unit_price(price, "gft estimator");
  EstimatorDraw draw;
  draw.head = rng.uniform() < price;  // never at p = 0, always at p = 1
  const double u = rng.uniform_closed();
  if (draw.head) {
    draw.aux = std::min(price, price * u);
    draw.pair = {draw.aux, price};
  } else {
    draw.aux = std::min(1.0, price + (1.0 - price) * u);
    draw.pair = {price, draw.aux};
  }
  return draw;
}

struct EstimatorOutcome {
  EstimatorDraw draw;
  bool estimate = false;  // the observed one-bit feedback
};

inline EstimatorOutcome gft_estimator(double price, const ValuationPair& v, Rng& rng) {
  EstimatorOutcome out;
  out.draw = draw_estimator(price, rng);
  out.estimate = one_bit_feedback(out.draw.pair, v).traded;
  return out;
}

// ---------------------------------------------------------------------------

struct BlockParams {
  std::size_t horizon = 0;       // T
  std::size_t block_length = 0;  // Delta
  std::size_t blocks = 0;        // S
  PriceGrid grid = uniform_grid(1);
  double eta = 0.0;  // inner MW rate

  void validate() const {
    if (horizon == 0 || block_length == 0 || blocks == 0) {
      throw std::invalid_argument("block decomposition: T, block length and block count must be positive");
    }
    if (grid.size() > block_length) {
      throw std::invalid_argument("block decomposition: grid has " + std::to_string(grid.size()) +
                                  " prices but blocks hold only " + std::to_string(block_length) +
                                  " rounds");
    }
    if (blocks * block_length < horizon) {
      throw std::invalid_argument("block decomposition: blocks * block length < horizon");
    }
    if (!(eta > 0.0)) throw std::invalid_argument("block decomposition: eta must be positive");
  }
};

// Smallest n with n^k >= x.
inline std::size_t ceil_root(std::size_t x, unsigned k) {
  auto pow_k = [k](std::size_t n) {
    unsigned __int128 r = 1;
    for (unsigned i = 0; i < k; ++i) r *= n;
    return r;
  };
  auto n = static_cast<std::size_t>(std::pow(static_cast<double>(x), 1.0 / k));
  while (n > 0 && pow_k(n) >= x) --n;
  while (pow_k(n) < x) ++n;
  return n;
}

// Delta = ceil(sqrt T), S = ceil(T / Delta), grid of multiples of 1/ceil(T^{1/4}),
// inner eta = sqrt(log K / S).
inline BlockParams block_decomposition_defaults(std::size_t horizon) {
  if (horizon == 0) throw std::invalid_argument("block decomposition: horizon must be positive");
  BlockParams params;
  params.horizon = horizon;
  params.block_length = ceil_root(horizon, 2);
  params.blocks = (horizon + params.block_length - 1) / params.block_length;
  params.grid = uniform_grid(std::max<std::size_t>(1, ceil_root(horizon, 4)));
  const double experts = static_cast<double>(params.grid.size());
  params.eta = std::sqrt(std::log(experts) / static_cast<double>(params.blocks));
  return params;
}

// Block-Decomposition: an inner MW over the grid picks one price per block;
// each block reserves |Q| uniformly placed rounds (a uniform random injection
// Q -> block) to run the estimator once per grid price, posts the block price
// on all other rounds, and feeds the |Q| one-bit estimates to the inner MW at
// block end. Rounds past T in the last block are dummy rounds with zero gain.
class BlockDecompositionLearner final : public Learner {
 public:
  explicit BlockDecompositionLearner(BlockParams params)
      : params_(std::move(params)), inner_(1, 1.0) {
    params_.validate();
    inner_ = MultiplicativeWeights(params_.grid.size(), params_.eta);
  }

  std::string name() const override { return "block-decomposition"; }

  void configure(const ProtocolConfig& config) override {
    if (config.feedback != FeedbackModel::OneBit) {
      throw ConfigError("block-decomposition requires one-bit feedback, got " +
                        to_string(config.feedback));
    }
    if (config.price_mode != PriceMode::TwoPrices) {
      throw ConfigError("block-decomposition requires two-price mode");
    }
    if (config.horizon != params_.horizon) {
      throw ConfigError("block-decomposition built for T=" + std::to_string(params_.horizon) +
                        " but run with T=" + std::to_string(config.horizon));
    }
  }

  void reset(const EpisodeSeeds& seeds) override {
    learner_rng_.reseed(seeds.learner);
    estimator_rng_.reseed(seeds.estimator);
    inner_ = MultiplicativeWeights(params_.grid.size(), params_.eta);
    explore_at_.assign(params_.block_length, kNoProbe);
    estimates_.assign(params_.grid.size(), 0.0);
    positions_.resize(params_.block_length);
    block_price_ = 0.0;
    pending_probe_ = kNoProbe;
    current_round_ = 0;
    exploration_rounds_ = 0;
    blocks_completed_ = 0;
  }

  PricePair act(std::size_t t) override {
    current_round_ = t;
    const std::size_t offset = t % params_.block_length;
    if (offset == 0) start_block();
    pending_probe_ = explore_at_[offset];
    if (pending_probe_ != kNoProbe) {
      ++exploration_rounds_;
      return draw_estimator(params_.grid[pending_probe_], estimator_rng_).pair;
    }
    return PricePair::single(block_price_);
  }

  void observe(const Feedback& feedback) override {
    const auto* bit = std::get_if<OneBitFeedback>(&feedback);
    if (bit == nullptr) throw ConfigError("block-decomposition received non one-bit feedback");
    if (pending_probe_ != kNoProbe) estimates_[pending_probe_] = bit->traded ? 1.0 : 0.0;
    const std::size_t offset = current_round_ % params_.block_length;
    if (offset + 1 == params_.block_length || current_round_ + 1 == params_.horizon) {
      inner_.update(estimates_);
      last_estimates_ = estimates_;
      ++blocks_completed_;
    }
  }

  const BlockParams& params() const { return params_; }
  double block_price() const { return block_price_; }
  std::size_t exploration_rounds() const { return exploration_rounds_; }
  std::size_t blocks_completed() const { return blocks_completed_; }
  // Estimates fed to the inner MW at the most recent block end.
  std::span<const double> last_block_estimates() const { return last_estimates_; }
  const MultiplicativeWeights& inner() const { return inner_; }

 private:
  static constexpr std::size_t kNoProbe = static_cast<std::size_t>(-1);

  void start_block() {
    block_price_ = params_.grid[inner_.sample(learner_rng_)];
    // Partial Fisher-Yates: the first |Q| slots form a uniform injection.
    std::iota(positions_.begin(), positions_.end(), std::size_t{0});
    std::fill(explore_at_.begin(), explore_at_.end(), kNoProbe);
    const std::size_t probes = params_.grid.size();
    for (std::size_t i = 0; i < probes; ++i) {
      const std::size_t j = i + estimator_rng_.below(params_.block_length - i);
      std::swap(positions_[i], positions_[j]);
      explore_at_[positions_[i]] = i;
    }
    std::fill(estimates_.begin(), estimates_.end(), 0.0);
  }

  BlockParams params_;
  MultiplicativeWeights inner_;
  Rng learner_rng_;
  Rng estimator_rng_;
  std::vector<std::size_t> explore_at_;
  std::vector<std::size_t> positions_;
  std::vector<double> estimates_;
  std::vector<double> last_estimates_;
  double block_price_ = 0.0;
  std::size_t pending_probe_ = kNoProbe;
  std::size_t current_round_ = 0;
  std::size_t exploration_rounds_ = 0;
  std::size_t blocks_completed_ = 0;
};

}  // namespace bilateral

#endif  // BILATERAL_LEARNERS_HPP
