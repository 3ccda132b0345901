#ifndef BILATERAL_EXPERIMENT_HPP
#define BILATERAL_EXPERIMENT_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bilateral/adversaries.hpp"
#include "bilateral/feedback_env.hpp"
#include "bilateral/game_json.hpp"
#include "bilateral/learners.hpp"
#include "bilateral/rational.hpp"
#include "bilateral/rng.hpp"
#include "bilateral/trade_core.hpp"

// Experiment configuration, batch execution and report emission behind the
// bilateral-bench command line.

namespace bilateral {

using nlohmann::json;

// A named component with free-form parameters, e.g. {"name": "nested-thirds",
// "params": {"delta": 0.05}}.
struct ComponentSpec {
  std::string name;
  json params = json::object();
};

struct ExperimentConfig {
  ComponentSpec adversary;
  ComponentSpec learner;
  FeedbackModel feedback = FeedbackModel::Full;
  PriceMode price_mode = PriceMode::SinglePrice;
  std::size_t horizon = 1;
  std::vector<double> alphas{1.0, 2.0};
  std::uint64_t master_seed = 0;
  std::size_t seed_count = 1;
  std::vector<std::uint64_t> seeds;  // explicit list; overrides master_seed/seed_count
  std::string output = "out";
  bool write_traces = false;
  // Directory relative paths in the config resolve against; not serialized.
  std::filesystem::path base_dir;

  std::vector<std::uint64_t> seed_list() const {
    if (!seeds.empty()) return seeds;
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < seed_count; ++i) out.push_back(derive_seed(master_seed, "episode", i));
    return out;
  }
};

// Integers parsed from text are unsigned, integers built in code are signed.
inline bool is_count(const json& v, std::uint64_t minimum) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>() >= minimum;
  return v.is_number_integer() && v.get<std::int64_t>() >= 0 &&
         static_cast<std::uint64_t>(v.get<std::int64_t>()) >= minimum;
}

// ---------------------------------------------------------------------------
// Parameter access with field-qualified diagnostics.

class ParamReader {
 public:
  ParamReader(const json& params, std::string prefix) : params_(params), prefix_(std::move(prefix)) {
    if (!params_.is_object()) throw ConfigError(prefix_ + ": params must be an object");
  }

  std::string field(const std::string& key) const { return prefix_ + "." + key; }

  bool has(const std::string& key) const {
    used_.insert(key);
    return params_.contains(key);
  }

  const json& raw(const std::string& key) const {
    used_.insert(key);
    if (!params_.contains(key)) throw ConfigError(field(key) + ": required parameter missing");
    return params_.at(key);
  }

  double number(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(field(key) + ": expected a number");
    return v.get<double>();
  }

  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  std::size_t count(const std::string& key) const {
    const json& v = raw(key);
    if (!is_count(v, 1)) {
      throw ConfigError(field(key) + ": expected a positive integer");
    }
    return v.get<std::size_t>();
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = params_.at(key);
    if (!v.is_boolean()) throw ConfigError(field(key) + ": expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(field(key) + ": expected a string");
    return v.get<std::string>();
  }

  // A rational given as "a/b", an integer, or a float whose reciprocal is an
  // integer (0.1 -> 1/10).
  Rational rational(const std::string& key) const {
    const json& v = raw(key);
    try {
      if (v.is_string()) return parse_rational(v.get<std::string>());
      if (v.is_number_integer()) return Rational(v.get<long long>());
      if (v.is_number_float()) {
        const double x = v.get<double>();
        const double inv = std::round(1.0 / x);
        if (x > 0.0 && inv >= 1.0 && std::abs(1.0 / inv - x) <= 1e-12 * x) {
          return make_rational(1, static_cast<long long>(inv));
        }
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError(field(key) + ": " + e.what());
    }
    throw ConfigError(field(key) + ": expected a rational such as \"1/30\"");
  }

  // Rejects keys nobody asked for.
  void finish() const {
    for (const auto& item : params_.items()) {
      if (!used_.count(item.key())) throw ConfigError(field(item.key()) + ": unknown parameter");
    }
  }

 private:
  const json& params_;
  std::string prefix_;
  mutable std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// Config (de)serialization.

inline json config_to_json(const ExperimentConfig& c) {
  json out{{"adversary", {{"name", c.adversary.name}, {"params", c.adversary.params}}},
           {"learner", {{"name", c.learner.name}, {"params", c.learner.params}}},
           {"feedback", to_string(c.feedback)},
           {"price_mode", to_string(c.price_mode)},
           {"horizon", c.horizon},
           {"alphas", c.alphas},
           {"master_seed", c.master_seed},
           {"seed_count", c.seed_count},
           {"output", c.output},
           {"write_traces", c.write_traces}};
  if (!c.seeds.empty()) out["seeds"] = c.seeds;
  return out;
}

inline std::string canonical_config(const ExperimentConfig& c) { return config_to_json(c).dump(); }

inline bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return canonical_config(a) == canonical_config(b);
}

// FNV-1a over the canonical JSON dump, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& c) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(canonical_config(c));
  return out.str();
}

inline ComponentSpec component_from_json(const json& doc, const std::string& field) {
  if (!doc.contains(field)) throw ConfigError(field + ": missing");
  const json& v = doc.at(field);
  ComponentSpec spec;
  if (v.is_string()) {
    spec.name = v.get<std::string>();
    return spec;
  }
  if (!v.is_object()) throw ConfigError(field + ": expected an object with 'name'");
  if (!v.contains("name") || !v.at("name").is_string()) {
    throw ConfigError(field + ".name: missing or not a string");
  }
  for (const auto& item : v.items()) {
    if (item.key() != "name" && item.key() != "params") {
      throw ConfigError(field + "." + item.key() + ": unknown field");
    }
  }
  spec.name = v.at("name").get<std::string>();
  if (v.contains("params")) {
    if (!v.at("params").is_object()) throw ConfigError(field + ".params: expected an object");
    spec.params = v.at("params");
  }
  return spec;
}

inline void validate_config(const ExperimentConfig& config);

inline ExperimentConfig config_from_json(const json& doc,
                                         const std::filesystem::path& base_dir = {}) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  static const std::set<std::string> known{
      "adversary", "learner",    "feedback",   "price_mode", "horizon",     "alphas",
      "master_seed", "seed_count", "seeds",    "output",     "write_traces"};
  for (const auto& item : doc.items()) {
    if (!known.count(item.key())) throw ConfigError(item.key() + ": unknown config field");
  }
  ExperimentConfig c;
  c.base_dir = base_dir;
  c.adversary = component_from_json(doc, "adversary");
  c.learner = component_from_json(doc, "learner");
  try {
    if (doc.contains("feedback")) c.feedback = parse_feedback_model(doc.at("feedback").get<std::string>());
  } catch (const std::exception& e) {
    throw ConfigError(std::string("feedback: ") + e.what());
  }
  try {
    if (doc.contains("price_mode")) c.price_mode = parse_price_mode(doc.at("price_mode").get<std::string>());
  } catch (const std::exception& e) {
    throw ConfigError(std::string("price_mode: ") + e.what());
  }
  if (!doc.contains("horizon") || !is_count(doc.at("horizon"), 1)) {
    throw ConfigError("horizon: required positive integer");
  }
  c.horizon = doc.at("horizon").get<std::size_t>();
  if (doc.contains("alphas")) {
    const json& a = doc.at("alphas");
    if (!a.is_array() || a.empty()) throw ConfigError("alphas: expected a nonempty array");
    c.alphas.clear();
    for (const auto& x : a) {
      if (!x.is_number() || !(x.get<double>() >= 1.0)) {
        throw ConfigError("alphas: every alpha must be a number >= 1");
      }
      c.alphas.push_back(x.get<double>());
    }
  }
  if (doc.contains("master_seed")) {
    if (!is_count(doc.at("master_seed"), 0)) {
      throw ConfigError("master_seed: expected a nonnegative integer");
    }
    c.master_seed = doc.at("master_seed").get<std::uint64_t>();
  }
  if (doc.contains("seed_count")) {
    if (!is_count(doc.at("seed_count"), 1)) {
      throw ConfigError("seed_count: expected a positive integer");
    }
    c.seed_count = doc.at("seed_count").get<std::size_t>();
  }
  if (doc.contains("seeds")) {
    const json& s = doc.at("seeds");
    if (!s.is_array() || s.empty()) throw ConfigError("seeds: expected a nonempty array");
    for (const auto& x : s) {
      if (!is_count(x, 0)) throw ConfigError("seeds: every seed must be a nonnegative integer");
      c.seeds.push_back(x.get<std::uint64_t>());
    }
  }
  if (doc.contains("output")) {
    if (!doc.at("output").is_string()) throw ConfigError("output: expected a string");
    c.output = doc.at("output").get<std::string>();
  }
  if (doc.contains("write_traces")) {
    if (!doc.at("write_traces").is_boolean()) throw ConfigError("write_traces: expected true or false");
    c.write_traces = doc.at("write_traces").get<bool>();
  }
  validate_config(c);
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return config_from_json(doc, path.parent_path());
}

// ---------------------------------------------------------------------------
// Factories.

inline LearnerFactory make_learner_factory(const ComponentSpec& spec, std::size_t horizon) {
  const ParamReader p(spec.params, "learner.params");
  const std::string& name = spec.name;
  if (name == "fixed") {
    const double price = p.number("price");
    p.finish();
    if (!(price >= 0.0 && price <= 1.0)) throw ConfigError(p.field("price") + ": must lie in [0, 1]");
    return [price] { return std::make_unique<FixedPriceLearner>(price); };
  }
  if (name == "random-uniform") {
    p.finish();
    return [] { return std::make_unique<RandomUniformLearner>(); };
  }
  if (name == "mw-full") {
    const std::size_t steps = p.has("grid_steps") ? p.count("grid_steps") : horizon;
    const double eta = p.number("eta", mw_default_eta(horizon));
    p.finish();
    if (!(eta > 0.0)) throw ConfigError(p.field("eta") + ": must be positive");
    const PriceGrid grid = uniform_grid(steps);
    return [horizon, grid, eta] { return std::make_unique<MwFullFeedbackLearner>(horizon, grid, eta); };
  }
  if (name == "block-decomposition") {
    BlockParams params = block_decomposition_defaults(horizon);
    if (p.has("block_length")) {
      params.block_length = p.count("block_length");
      params.blocks = (horizon + params.block_length - 1) / params.block_length;
    }
    if (p.has("blocks")) params.blocks = p.count("blocks");
    if (p.has("grid_steps")) params.grid = uniform_grid(p.count("grid_steps"));
    params.eta = p.number("eta", std::sqrt(std::log(static_cast<double>(params.grid.size())) /
                                           static_cast<double>(params.blocks)));
    p.finish();
    try {
      params.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("learner.params: ") + e.what());
    }
    return [params] { return std::make_unique<BlockDecompositionLearner>(params); };
  }
  throw ConfigError("learner.name: unknown learner '" + name +
                    "' (expected fixed, mw-full, block-decomposition, random-uniform)");
}

// delta given as a number or as the string "1/T".
inline double delta_param(const ParamReader& p, std::size_t horizon) {
  const json& v = p.raw("delta");
  if (v.is_string() && v.get<std::string>() == "1/T") return 1.0 / static_cast<double>(horizon);
  if (v.is_number()) return v.get<double>();
  throw ConfigError(p.field("delta") + ": expected a number or \"1/T\"");
}

inline SequenceSource make_sequence_source(const ExperimentConfig& config, std::size_t horizon) {
  const ComponentSpec& spec = config.adversary;
  const ParamReader p(spec.params, "adversary.params");
  const std::string& name = spec.name;
  auto checked = [&](auto&& check) {
    try {
      check();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("adversary.params: ") + e.what());
    }
  };
  if (name == "nested-thirds") {
    const double delta = delta_param(p, horizon);
    p.finish();
    checked([&] { require_nested_thirds_delta(delta); });
    return [=](std::uint64_t seed) { return nested_thirds_adversary(delta, horizon, seed); };
  }
  if (name == "two-copy") {
    const double delta = delta_param(p, horizon);
    p.finish();
    checked([&] { require_two_copy_delta(delta); });
    return [=](std::uint64_t seed) { return two_copy_adversary(delta, horizon, seed); };
  }
  if (name == "grid-hiding") {
    GridHidingParams params;
    if (p.has("alpha")) {
      const Rational alpha = p.rational("alpha");
      checked([&] { params = GridHidingParams::for_alpha(alpha); });
    } else {
      params = {p.rational("block_width"), p.rational("cell_width")};
    }
    const bool perturb = p.flag("perturb", true);
    p.finish();
    checked([&] { params.validate(); });
    return [=](std::uint64_t seed) { return draw_grid_hiding(params, horizon, seed, perturb).sequence; };
  }
  if (name == "four-outcome") {
    const double epsilon = p.number("epsilon");
    const double pert = p.number("perturbation", 0.0);
    p.finish();
    checked([&] { draw_four_outcome(epsilon, pert, 1, 0); });
    return [=](std::uint64_t seed) { return four_outcome_adversary(epsilon, pert, horizon, seed); };
  }
  if (name == "constant") {
    const ValuationPair v{p.number("s"), p.number("b")};
    p.finish();
    if (!v.in_unit_square()) throw ConfigError("adversary.params: (s, b) must lie in [0,1]^2");
    return [=](std::uint64_t) { return ValuationSequence(std::vector<ValuationPair>(horizon, v)); };
  }
  if (name == "iid") {
    const json& support = p.raw("support");
    p.finish();
    if (!support.is_array() || support.empty()) {
      throw ConfigError(p.field("support") + ": expected a nonempty array of [s, b, probability]");
    }
    std::vector<WeightedValuation> items;
    for (const auto& entry : support) {
      if (!entry.is_array() || entry.size() != 3 || !entry[0].is_number() || !entry[1].is_number() ||
          !entry[2].is_number()) {
        throw ConfigError(p.field("support") + ": every entry must be [s, b, probability]");
      }
      items.push_back({{entry[0].get<double>(), entry[1].get<double>()}, entry[2].get<double>()});
    }
    checked([&] { iid_finite_adversary(items, 1, 0); });
    return [=](std::uint64_t seed) { return iid_finite_adversary(items, horizon, seed); };
  }
  if (name == "fixed-file") {
    std::filesystem::path path = p.text("path");
    p.finish();
    if (path.is_relative()) path = config.base_dir / path;
    ValuationSequence seq = load_valuation_csv(path.string());
    if (seq.horizon() != horizon) {
      throw ConfigError(p.field("path") + ": file holds " + std::to_string(seq.horizon()) +
                        " rounds but horizon is " + std::to_string(horizon));
    }
    return [seq](std::uint64_t) { return seq; };
  }
  throw ConfigError("adversary.name: unknown adversary '" + name +
                    "' (expected nested-thirds, two-copy, grid-hiding, four-outcome, constant, iid, "
                    "fixed-file)");
}

// Learner/feedback compatibility and parameter checks, without touching files.
inline void validate_config(const ExperimentConfig& config) {
  if (config.horizon == 0) throw ConfigError("horizon: must be positive");
  for (double a : config.alphas) {
    if (!(a >= 1.0)) throw ConfigError("alphas: every alpha must be >= 1");
  }
  if (config.learner.name == "mw-full" && config.feedback != FeedbackModel::Full) {
    throw ConfigError("feedback: learner mw-full requires \"full\", got \"" +
                      to_string(config.feedback) + "\"");
  }
  if (config.learner.name == "block-decomposition") {
    if (config.feedback != FeedbackModel::OneBit) {
      throw ConfigError("feedback: learner block-decomposition requires \"one-bit\", got \"" +
                        to_string(config.feedback) + "\"");
    }
    if (config.price_mode != PriceMode::TwoPrices) {
      throw ConfigError("price_mode: learner block-decomposition requires \"two\"");
    }
  }
  make_learner_factory(config.learner, config.horizon);
  if (config.adversary.name != "fixed-file") make_sequence_source(config, config.horizon);
}

// ---------------------------------------------------------------------------
// Reports.

inline json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.stddev}}; }

inline json batch_report(const ExperimentConfig& config, const BatchResult& batch) {
  json per_seed = json::array();
  for (const auto& r : batch.per_seed) {
    per_seed.push_back({{"seed", r.seed},
                        {"total_gft", r.total_gft},
                        {"total_sw", r.total_sw},
                        {"hindsight_price", r.hindsight_price},
                        {"hindsight_gft", r.hindsight_gft},
                        {"regret", r.regrets}});
  }
  json regret = json::array();
  for (std::size_t a = 0; a < batch.alphas.size(); ++a) {
    regret.push_back(
        {{"alpha", batch.alphas[a]}, {"mean", batch.regret[a].mean}, {"std", batch.regret[a].stddev}});
  }
  return {{"config_hash", config_hash(config)},
          {"master_seed", config.master_seed},
          {"rng_version", kRngVersion},
          {"config", config_to_json(config)},
          {"horizon", config.horizon},
          {"alphas", batch.alphas},
          {"per_seed", std::move(per_seed)},
          {"summary",
           {{"total_gft", mean_std_json(batch.total_gft)},
            {"hindsight_gft", mean_std_json(batch.hindsight_gft)},
            {"regret", std::move(regret)}}}};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

inline std::string dump_report(const json& report) { return report.dump(2) + "\n"; }

inline BatchResult execute(const ExperimentConfig& config, std::size_t horizon, unsigned threads,
                           bool keep_traces) {
  const auto learner = make_learner_factory(config.learner, horizon);
  const auto source = make_sequence_source(config, horizon);
  const ProtocolConfig protocol{config.feedback, config.price_mode, horizon};
  const auto seeds = config.seed_list();
  return run_many(learner, source, protocol, seeds, config.alphas, {threads, keep_traces});
}

struct RunOutput {
  BatchResult batch;
  json report;
  std::filesystem::path report_path;
};

// Runs the configured batch and writes report.json (plus one trace CSV per seed
// when write_traces is set) under out_dir.
inline RunOutput cmd_run(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                         unsigned threads = 0) {
  RunOutput out;
  out.batch = execute(config, config.horizon, threads, config.write_traces);
  out.report = batch_report(config, out.batch);
  out.report_path = out_dir / "report.json";
  write_text(out.report_path, dump_report(out.report));
  if (config.write_traces) {
    for (const auto& r : out.batch.per_seed) {
      std::ostringstream csv;
      write_trace_csv(csv, *r.trace);
      write_text(out_dir / "traces" / ("seed-" + std::to_string(r.seed) + ".csv"), csv.str());
    }
  }
  return out;
}

struct SweepRow {
  std::size_t horizon = 0;
  double alpha = 1.0;
  double mean_regret = 0.0;
  double std_regret = 0.0;
};

// Least-squares slope of log y on log x; NaN unless every y is positive.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::nan("");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) return std::nan("");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

struct SweepOutput {
  std::vector<SweepRow> rows;
  std::vector<double> slopes;  // one per alpha
  std::filesystem::path csv_path;
};

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "T,alpha,mean_regret,std_regret\n";
  for (const auto& r : rows) {
    out << r.horizon << ',' << detail::format_double(r.alpha) << ','
        << detail::format_double(r.mean_regret) << ',' << detail::format_double(r.std_regret) << '\n';
  }
}

inline SweepOutput cmd_sweep(const ExperimentConfig& config, const std::vector<std::size_t>& horizons,
                             const std::filesystem::path& out_dir, unsigned threads = 0) {
  if (horizons.size() < 2) throw ConfigError("horizons: a sweep needs at least two values");
  SweepOutput out;
  std::vector<std::vector<double>> means(config.alphas.size());
  std::vector<double> xs;
  for (std::size_t T : horizons) {
    if (T == 0) throw ConfigError("horizons: every horizon must be positive");
    ExperimentConfig at_t = config;
    at_t.horizon = T;
    validate_config(at_t);
    const BatchResult batch = execute(at_t, T, threads, false);
    xs.push_back(static_cast<double>(T));
    for (std::size_t a = 0; a < config.alphas.size(); ++a) {
      out.rows.push_back({T, config.alphas[a], batch.regret[a].mean, batch.regret[a].stddev});
      means[a].push_back(batch.regret[a].mean);
    }
  }
  for (const auto& m : means) out.slopes.push_back(loglog_slope(xs, m));
  std::ostringstream csv;
  write_sweep_csv(csv, out.rows);
  out.csv_path = out_dir / "sweep.csv";
  write_text(out.csv_path, csv.str());
  return out;
}

// ---------------------------------------------------------------------------
// Estimator validation: Monte Carlo means of the one-bit estimator against the
// exact GFT(p) over random (p, s, b). Trials 0 and 1 use p = 0 and p = 1.

struct EstimatorTrial {
  double price = 0.0;
  ValuationPair valuation;
  double exact = 0.0;
  double mean = 0.0;
  double variance = 0.0;   // sample variance of the estimates
  double tolerance = 0.0;  // band_sigmas * sqrt(variance / samples)
  bool passed = false;
};

struct EstimatorValidation {
  std::vector<EstimatorTrial> trials;
  double band_sigmas = 4.0;
  bool passed = true;
};

// With zero sample variance the band falls back to the exact Bernoulli
// variance GFT (1 - GFT), so a rare event that was never observed is judged on
// its true spread.
inline EstimatorTrial run_estimator_trial(double price, const ValuationPair& v, std::size_t samples,
                                          std::uint64_t seed, double band_sigmas) {
  EstimatorTrial trial;
  trial.price = price;
  trial.valuation = v;
  trial.exact = gain_from_trade(price, v);
  Rng rng(seed);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < samples; ++k) hits += gft_estimator(price, v, rng).estimate ? 1 : 0;
  const double n = static_cast<double>(samples);
  trial.mean = static_cast<double>(hits) / n;
  trial.variance = samples > 1 ? (static_cast<double>(hits) - n * trial.mean * trial.mean) / (n - 1.0) : 0.0;
  trial.variance = std::max(0.0, trial.variance);
  const double spread = trial.variance > 0.0 ? trial.variance : trial.exact * (1.0 - trial.exact);
  trial.tolerance = band_sigmas * std::sqrt(spread / n);
  trial.passed = std::abs(trial.mean - trial.exact) <= trial.tolerance;
  return trial;
}

inline EstimatorValidation validate_estimator(std::size_t trials, std::size_t samples,
                                              std::uint64_t seed, double band_sigmas = 4.0) {
  if (trials == 0 || samples == 0) throw std::invalid_argument("trials and samples must be positive");
  EstimatorValidation out;
  out.band_sigmas = band_sigmas;
  Rng draws(derive_seed(seed, "triples"));
  for (std::size_t i = 0; i < trials; ++i) {
    double price = draws.uniform_closed();
    if (i == 0) price = 0.0;
    if (i == 1) price = 1.0;
    const double x = draws.uniform_closed();
    const double y = draws.uniform_closed();
    const ValuationPair v{std::min(x, y), std::max(x, y)};
    out.trials.push_back(
        run_estimator_trial(price, v, samples, derive_seed(seed, "estimator", i), band_sigmas));
    out.passed = out.passed && out.trials.back().passed;
  }
  return out;
}

inline void write_estimator_csv(std::ostream& out, const EstimatorValidation& v) {
  out << "trial,p,s,b,exact,mean,deviation,tolerance,pass\n";
  for (std::size_t i = 0; i < v.trials.size(); ++i) {
    const auto& t = v.trials[i];
    out << i << ',' << detail::format_double(t.price) << ',' << detail::format_double(t.valuation.s)
        << ',' << detail::format_double(t.valuation.b) << ',' << detail::format_double(t.exact) << ','
        << detail::format_double(t.mean) << ',' << detail::format_double(t.mean - t.exact) << ','
        << detail::format_double(t.tolerance) << ',' << (t.passed ? 1 : 0) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Game analysis.

inline constexpr const char* kBuiltinTradeGame = "builtin:bilateral-trade";

struct GameReport {
  pm::GameAnalysis analysis;
  json report;
  bool builtin = false;
  std::vector<std::string> golden_mismatches;
};

inline pm::Game load_game(const std::string& source) {
  if (source == kBuiltinTradeGame) return pm::bilateral_trade_game();
  std::ifstream in(source);
  if (!in) throw std::invalid_argument("cannot open game file '" + source + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("game file '" + source + "' is not valid JSON: " + e.what());
  }
  return pm::game_from_json(doc);
}

inline GameReport cmd_analyze_game(const std::string& source) {
  GameReport out;
  out.builtin = source == kBuiltinTradeGame;
  out.analysis = pm::analyze(load_game(source));
  out.report = pm::analysis_to_json(out.analysis);
  if (out.builtin) {
    out.golden_mismatches = pm::golden_mismatches(out.analysis);
    out.report["golden"] = {{"matches", out.golden_mismatches.empty()},
                            {"mismatches", out.golden_mismatches}};
  }
  return out;
}

}  // namespace bilateral

#endif  // BILATERAL_EXPERIMENT_HPP
