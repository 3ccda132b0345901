#ifndef BILATERAL_FEEDBACK_ENV_HPP
#define BILATERAL_FEEDBACK_ENV_HPP

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "json.hpp"

#include "bilateral/rng.hpp"
#include "bilateral/trade_core.hpp"

namespace bilateral {

enum class FeedbackModel { Full, TwoBit, OneBit };
enum class PriceMode { SinglePrice, TwoPrices };

inline std::string to_string(FeedbackModel model) {
  switch (model) {
    case FeedbackModel::Full: return "full";
    case FeedbackModel::TwoBit: return "two-bit";
    case FeedbackModel::OneBit: return "one-bit";
  }
  return "?";
}

inline std::string to_string(PriceMode mode) {
  return mode == PriceMode::SinglePrice ? "single" : "two";
}

inline FeedbackModel parse_feedback_model(const std::string& name) {
  if (name == "full") return FeedbackModel::Full;
  if (name == "two-bit") return FeedbackModel::TwoBit;
  if (name == "one-bit") return FeedbackModel::OneBit;
  throw std::invalid_argument("unknown feedback model '" + name + "'");
}

inline PriceMode parse_price_mode(const std::string& name) {
  if (name == "single") return PriceMode::SinglePrice;
  if (name == "two") return PriceMode::TwoPrices;
  throw std::invalid_argument("unknown price mode '" + name + "'");
}

struct FullFeedback {
  double s = 0.0;
  double b = 0.0;
  friend bool operator==(const FullFeedback&, const FullFeedback&) = default;
};

struct TwoBitFeedback {
  bool seller_accepts = false;
  bool buyer_accepts = false;
  friend bool operator==(const TwoBitFeedback&, const TwoBitFeedback&) = default;
};

struct OneBitFeedback {
  bool traded = false;
  friend bool operator==(const OneBitFeedback&, const OneBitFeedback&) = default;
};

using Feedback = std::variant<FullFeedback, TwoBitFeedback, OneBitFeedback>;

inline TwoBitFeedback two_bit_feedback(const PricePair& pp, const ValuationPair& v) {
  return {v.s <= pp.p, pp.q <= v.b};
}

// 1{s <= p <= q <= b}; for budget-balanced pairs this is the AND of the two bits.
inline OneBitFeedback one_bit_feedback(const PricePair& pp, const ValuationPair& v) {
  return {v.s <= pp.p && pp.p <= pp.q && pp.q <= v.b};
}

inline Feedback make_feedback(FeedbackModel model, const PricePair& pp, const ValuationPair& v) {
  switch (model) {
    case FeedbackModel::Full: return FullFeedback{v.s, v.b};
    case FeedbackModel::TwoBit: return two_bit_feedback(pp, v);
    case FeedbackModel::OneBit: return one_bit_feedback(pp, v);
  }
  throw std::logic_error("unreachable feedback model");
}

namespace detail {

inline std::string format_double(double x) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), x);
  return std::string(buffer, result.ptr);
}

}  // namespace detail

// Compact, comma-free rendering used in trace CSVs: "full:s:b", "two:10", "one:1".
inline std::string to_string(const Feedback& feedback) {
  return std::visit(
      [](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, FullFeedback>) {
          return "full:" + detail::format_double(f.s) + ":" + detail::format_double(f.b);
        } else if constexpr (std::is_same_v<T, TwoBitFeedback>) {
          return std::string("two:") + (f.seller_accepts ? '1' : '0') +
                 (f.buyer_accepts ? '1' : '0');
        } else {
          return std::string("one:") + (f.traded ? '1' : '0');
        }
      },
      feedback);
}

struct ProtocolConfig {
  FeedbackModel feedback = FeedbackModel::Full;
  PriceMode price_mode = PriceMode::SinglePrice;
  std::size_t horizon = 1;
};

class ProtocolViolation : public std::runtime_error {
 public:
  ProtocolViolation(std::size_t round, const std::string& what)
      : std::runtime_error("protocol violation at round " + std::to_string(round) + ": " + what),
        round_(round) {}
  std::size_t round() const { return round_; }

 private:
  std::size_t round_;
};

// Raised when a learner is paired with a feedback model or price mode it
// cannot work with.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A learner sees only the feedback channel. act() may depend on earlier
// feedback and internal randomness, nothing else.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::string name() const = 0;
  // Called once per episode before reset(); throws ConfigError on mismatch.
  virtual void configure(const ProtocolConfig& /*config*/) {}
  virtual void reset(const EpisodeSeeds& seeds) = 0;
  virtual PricePair act(std::size_t t) = 0;
  virtual void observe(const Feedback& feedback) = 0;
};

struct RoundRecord {
  PricePair prices;
  Feedback feedback;
  double gft = 0.0;
  double sw = 0.0;
};

struct EpisodeTrace {
  std::vector<RoundRecord> rounds;
  double total_gft = 0.0;
  double total_sw = 0.0;

  std::size_t horizon() const { return rounds.size(); }

  std::vector<double> realized_gfts() const {
    std::vector<double> out;
    out.reserve(rounds.size());
    for (const auto& r : rounds) out.push_back(r.gft);
    return out;
  }
};

inline void validate_prices(const PricePair& pp, const ProtocolConfig& config, std::size_t t) {
  if (!(pp.in_unit_range())) {
    throw ProtocolViolation(t, "price outside [0,1]: (" + detail::format_double(pp.p) + ", " +
                                   detail::format_double(pp.q) + ")");
  }
  if (!pp.budget_balanced()) {
    throw ProtocolViolation(t, "seller price exceeds buyer price");
  }
  if (config.price_mode == PriceMode::SinglePrice && !pp.is_single()) {
    throw ProtocolViolation(t, "two distinct prices posted in single-price mode");
  }
}

// Runs one episode of the posted-price protocol. The environment computes all
// feedback itself; seq is fixed before the run (oblivious adversary).
inline EpisodeTrace run_episode(Learner& learner, const ValuationSequence& seq,
                                const ProtocolConfig& config, std::uint64_t seed) {
  if (config.horizon == 0) throw std::invalid_argument("horizon must be positive");
  if (seq.horizon() != config.horizon) {
    throw std::invalid_argument("sequence length " + std::to_string(seq.horizon()) +
                                " differs from configured horizon " +
                                std::to_string(config.horizon));
  }
  learner.configure(config);
  learner.reset(EpisodeSeeds::from_master(seed));

  EpisodeTrace trace;
  trace.rounds.reserve(seq.horizon());
  for (std::size_t t = 0; t < seq.horizon(); ++t) {
    const PricePair pp = learner.act(t);
    validate_prices(pp, config, t);
    const ValuationPair& v = seq[t];
    RoundRecord record{pp, make_feedback(config.feedback, pp, v), gain_from_trade(pp, v),
                       social_welfare(pp, v)};
    learner.observe(record.feedback);
    trace.total_gft += record.gft;
    trace.total_sw += record.sw;
    trace.rounds.push_back(std::move(record));
  }
  return trace;
}

inline void write_trace_csv(std::ostream& out, const EpisodeTrace& trace) {
  out << "t,p,q,feedback,gft,sw\n";
  for (std::size_t t = 0; t < trace.rounds.size(); ++t) {
    const auto& r = trace.rounds[t];
    out << t << ',' << detail::format_double(r.prices.p) << ','
        << detail::format_double(r.prices.q) << ',' << to_string(r.feedback) << ','
        << detail::format_double(r.gft) << ',' << detail::format_double(r.sw) << '\n';
  }
}

inline nlohmann::json trace_to_json(const EpisodeTrace& trace) {
  nlohmann::json rounds = nlohmann::json::array();
  for (std::size_t t = 0; t < trace.rounds.size(); ++t) {
    const auto& r = trace.rounds[t];
    rounds.push_back({{"t", t},
                      {"p", r.prices.p},
                      {"q", r.prices.q},
                      {"feedback", to_string(r.feedback)},
                      {"gft", r.gft},
                      {"sw", r.sw}});
  }
  return {{"horizon", trace.horizon()},
          {"total_gft", trace.total_gft},
          {"total_sw", trace.total_sw},
          {"rounds", std::move(rounds)}};
}

// ---------------------------------------------------------------------------
// Batches of seeded episodes.

using LearnerFactory = std::function<std::unique_ptr<Learner>()>;
// Builds the valuation sequence for one episode from its adversary seed.
using SequenceSource = std::function<ValuationSequence(std::uint64_t adversary_seed)>;

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single value
};

inline MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return out;
}

struct SeedResult {
  std::uint64_t seed = 0;
  double total_gft = 0.0;
  double total_sw = 0.0;
  double hindsight_price = 0.0;
  double hindsight_gft = 0.0;
  std::vector<double> regrets;  // one per requested alpha
  std::optional<EpisodeTrace> trace;
};

struct BatchResult {
  std::vector<double> alphas;
  std::vector<SeedResult> per_seed;  // in the order of the seed list
  MeanStd total_gft;
  MeanStd hindsight_gft;
  std::vector<MeanStd> regret;  // one per alpha
};

struct BatchOptions {
  unsigned threads = 0;  // 0: BILATERAL_THREADS or hardware concurrency
  bool keep_traces = false;
};

inline unsigned default_thread_count() {
  if (const char* env = std::getenv("BILATERAL_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline void summarize(BatchResult& result) {
  std::vector<double> gft;
  std::vector<double> hindsight;
  for (const auto& r : result.per_seed) {
    gft.push_back(r.total_gft);
    hindsight.push_back(r.hindsight_gft);
  }
  result.total_gft = mean_std(gft);
  result.hindsight_gft = mean_std(hindsight);
  result.regret.clear();
  for (std::size_t a = 0; a < result.alphas.size(); ++a) {
    std::vector<double> column;
    for (const auto& r : result.per_seed) column.push_back(r.regrets[a]);
    result.regret.push_back(mean_std(column));
  }
}

inline SeedResult run_seed(const LearnerFactory& make_learner, const SequenceSource& source,
                           const ProtocolConfig& config, std::uint64_t seed,
                           std::span<const double> alphas, bool keep_trace) {
  const auto seeds = EpisodeSeeds::from_master(seed);
  const ValuationSequence seq = source(seeds.adversary);
  auto learner = make_learner();
  EpisodeTrace trace = run_episode(*learner, seq, config, seed);
  const PriceValue best = best_fixed_price(seq);

  SeedResult out;
  out.seed = seed;
  out.total_gft = trace.total_gft;
  out.total_sw = trace.total_sw;
  out.hindsight_price = best.price;
  out.hindsight_gft = best.total_gft;
  for (double alpha : alphas) out.regrets.push_back(best.total_gft - alpha * trace.total_gft);
  if (keep_trace) out.trace = std::move(trace);
  return out;
}

// Runs every seed (possibly on several threads) and aggregates. Results are
// stored by seed position, so the output does not depend on scheduling.
inline BatchResult run_many(const LearnerFactory& make_learner, const SequenceSource& source,
                            const ProtocolConfig& config, std::span<const std::uint64_t> seeds,
                            std::span<const double> alphas, const BatchOptions& options = {}) {
  if (seeds.empty()) throw std::invalid_argument("run_many: empty seed list");
  for (double alpha : alphas) {
    if (!(alpha >= 1.0)) throw std::invalid_argument("alpha must be >= 1");
  }
  BatchResult result;
  result.alphas.assign(alphas.begin(), alphas.end());
  result.per_seed.resize(seeds.size());

  const unsigned threads = std::min<std::size_t>(
      options.threads ? options.threads : default_thread_count(), seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        result.per_seed[i] =
            run_seed(make_learner, source, config, seeds[i], alphas, options.keep_traces);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  summarize(result);
  return result;
}

}  // namespace bilateral

#endif  // BILATERAL_FEEDBACK_ENV_HPP
