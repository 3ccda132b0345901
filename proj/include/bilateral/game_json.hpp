#ifndef BILATERAL_GAME_JSON_HPP
#define BILATERAL_GAME_JSON_HPP

#include <string>
#include <vector>

#include "json.hpp"

#include "bilateral/partial_monitoring.hpp"
#include "bilateral/rational.hpp"

// JSON ingestion of partial-monitoring games and JSON analysis reports.
//
// Game document:
//   {"gain": [["0", "1/2", ...], ...], "feedback": [["a", "b", ...], ...],
//    "actions": [...labels], "outcomes": [...labels]}
// Gains are rational strings or integers; floats are rejected. Actions in
// reports are numbered from 1.

namespace bilateral::pm {

using nlohmann::json;

inline Rational rational_from_json(const json& value, const std::string& where) {
  if (value.is_string()) {
    try {
      return parse_rational(value.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + ": " + e.what());
    }
  }
  if (value.is_number_integer()) return Rational(value.get<long long>());
  throw std::invalid_argument(where + ": expected a rational string such as \"1/6\"");
}

inline Game game_from_json(const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("game: document must be an object");
  for (const char* key : {"gain", "feedback"}) {
    if (!doc.contains(key) || !doc.at(key).is_array()) {
      throw std::invalid_argument(std::string("game: missing array '") + key + "'");
    }
  }
  Game game;
  const auto& gain = doc.at("gain");
  for (std::size_t i = 0; i < gain.size(); ++i) {
    if (!gain[i].is_array()) {
      throw std::invalid_argument("gain[" + std::to_string(i) + "] must be an array");
    }
    Vector row;
    for (std::size_t l = 0; l < gain[i].size(); ++l) {
      row.push_back(rational_from_json(
          gain[i][l], "gain[" + std::to_string(i) + "][" + std::to_string(l) + "]"));
    }
    game.gain.push_back(std::move(row));
  }
  const auto& feedback = doc.at("feedback");
  for (std::size_t i = 0; i < feedback.size(); ++i) {
    if (!feedback[i].is_array()) {
      throw std::invalid_argument("feedback[" + std::to_string(i) + "] must be an array");
    }
    std::vector<std::string> row;
    for (const auto& symbol : feedback[i]) {
      row.push_back(symbol.is_string() ? symbol.get<std::string>() : symbol.dump());
    }
    game.feedback.push_back(std::move(row));
  }
  if (doc.contains("actions")) game.action_labels = doc.at("actions").get<std::vector<std::string>>();
  if (doc.contains("outcomes")) {
    game.outcome_labels = doc.at("outcomes").get<std::vector<std::string>>();
  }
  game.validate();
  return game;
}

inline json game_to_json(const Game& game) {
  json gain = json::array();
  for (const auto& row : game.gain) {
    json r = json::array();
    for (const auto& x : row) r.push_back(bilateral::to_string(x));
    gain.push_back(std::move(r));
  }
  json doc{{"gain", gain}, {"feedback", game.feedback}};
  if (!game.action_labels.empty()) doc["actions"] = game.action_labels;
  if (!game.outcome_labels.empty()) doc["outcomes"] = game.outcome_labels;
  return doc;
}

inline json rationals_to_json(const Vector& v) {
  json out = json::array();
  for (const auto& x : v) out.push_back(bilateral::to_string(x));
  return out;
}

inline json one_based(const std::vector<std::size_t>& indices) {
  json out = json::array();
  for (std::size_t i : indices) out.push_back(i + 1);
  return out;
}

inline json signal_rows_to_json(const std::vector<SignalRow>& rows,
                                const std::vector<SignalMatrix>& matrices) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"action", r.action + 1},
                   {"symbol", matrices[r.action].symbols[r.symbol]},
                   {"row", rationals_to_json(r.values)}});
  }
  return out;
}

// Everything the analyzer knows about a game.
struct GameAnalysis {
  Game game;
  std::vector<SignalMatrix> signals;
  std::vector<Polytope> cells;
  std::vector<ActionClass> classes;
  std::vector<NeighborPair> neighbor_pairs;
  GlobalObservability global;
  LocalObservability local;

  std::vector<std::size_t> actions_of(ActionClass c) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < classes.size(); ++i) {
      if (classes[i] == c) out.push_back(i);
    }
    return out;
  }
};

inline GameAnalysis analyze(const Game& game) {
  GameAnalysis a;
  a.game = game;
  a.signals = signal_matrices(game);
  a.cells = cells(game);
  a.classes = classify_actions(a.cells);
  a.neighbor_pairs = neighbors(game, a.cells, a.classes);
  a.global = global_observability(game);
  a.local = local_observability(game, a.neighbor_pairs);
  return a;
}

inline json analysis_to_json(const GameAnalysis& a) {
  json report;
  report["actions"] = a.game.actions();
  report["outcomes"] = a.game.outcomes();
  if (!a.game.action_labels.empty()) report["action_labels"] = a.game.action_labels;
  if (!a.game.outcome_labels.empty()) report["outcome_labels"] = a.game.outcome_labels;

  json signals = json::array();
  for (std::size_t i = 0; i < a.signals.size(); ++i) {
    signals.push_back(
        {{"action", i + 1}, {"symbols", a.signals[i].symbols}, {"rows", a.signals[i].rows}});
  }
  report["signal_matrices"] = std::move(signals);

  json cell_list = json::array();
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    json vertices = json::array();
    for (const auto& v : a.cells[i].vertices()) vertices.push_back(rationals_to_json(v));
    cell_list.push_back({{"action", i + 1},
                         {"dimension", a.cells[i].dimension()},
                         {"vertices", std::move(vertices)}});
  }
  report["cells"] = std::move(cell_list);

  report["classification"] = {
      {"dominated", one_based(a.actions_of(ActionClass::Dominated))},
      {"degenerate", one_based(a.actions_of(ActionClass::Degenerate))},
      {"pareto_optimal", one_based(a.actions_of(ActionClass::ParetoOptimal))}};

  json pairs = json::array();
  for (const auto& p : a.neighbor_pairs) {
    json vertices = json::array();
    for (const auto& v : p.intersection_vertices) vertices.push_back(rationals_to_json(v));
    pairs.push_back({{"pair", {p.first + 1, p.second + 1}},
                     {"intersection_dimension", p.intersection_dimension},
                     {"intersection_vertices", std::move(vertices)},
                     {"neighborhood", one_based(p.neighborhood)}});
  }
  report["neighbors"] = std::move(pairs);

  json global{{"observable", a.global.observable},
              {"basis", signal_rows_to_json(a.global.basis, a.signals)}};
  if (a.global.observable) {
    json certs = json::array();
    for (const auto& c : a.global.certificates) {
      certs.push_back({{"pair", {c.first + 1, c.second + 1}},
                       {"difference", rationals_to_json(c.difference)},
                       {"coefficients", rationals_to_json(c.coefficients)}});
    }
    global["certificates"] = std::move(certs);
  } else if (a.global.failure) {
    global["failure"] = {{"pair", {a.global.failure->first + 1, a.global.failure->second + 1}},
                         {"difference", rationals_to_json(a.global.failure->difference)}};
  }
  report["global_observability"] = std::move(global);

  json local{{"observable", a.local.observable}};
  json local_pairs = json::array();
  for (const auto& r : a.local.pairs) {
    json entry{{"pair", {r.pair.first + 1, r.pair.second + 1}},
               {"difference", rationals_to_json(r.difference)},
               {"span_basis", signal_rows_to_json(r.basis, a.signals)},
               {"observable", r.coefficients.has_value()}};
    if (r.coefficients) entry["coefficients"] = rationals_to_json(*r.coefficients);
    local_pairs.push_back(std::move(entry));
  }
  local["pairs"] = std::move(local_pairs);
  if (a.local.witness) {
    const auto& w = *a.local.witness;
    local["witness"] = {{"pair", {w.pair.first + 1, w.pair.second + 1}},
                        {"difference", rationals_to_json(w.difference)},
                        {"span_basis", signal_rows_to_json(w.basis, a.signals)}};
  }
  report["local_observability"] = std::move(local);
  return report;
}

// Expected facts for the built-in bilateral trade game; returns the list of
// mismatches (empty when everything agrees).
inline std::vector<std::string> golden_mismatches(const GameAnalysis& a) {
  std::vector<std::string> bad;
  auto expect_set = [&](const char* what, const std::vector<std::size_t>& got,
                        const std::vector<std::size_t>& want_one_based) {
    std::vector<std::size_t> want;
    for (std::size_t w : want_one_based) want.push_back(w - 1);
    if (got != want) bad.push_back(std::string(what) + " set differs");
  };
  expect_set("dominated", a.actions_of(ActionClass::Dominated), {3, 4, 6, 7});
  expect_set("degenerate", a.actions_of(ActionClass::Degenerate), {1, 2, 9, 10});
  expect_set("pareto-optimal", a.actions_of(ActionClass::ParetoOptimal), {5, 8});
  if (a.neighbor_pairs.size() != 1) {
    bad.push_back("expected exactly one neighbor pair");
  } else {
    const auto& p = a.neighbor_pairs.front();
    if (p.first != 4 || p.second != 7) bad.push_back("neighbor pair is not (5,8)");
    if (p.intersection_dimension != 2) bad.push_back("neighbor intersection dimension is not 2");
    if (p.neighborhood != std::vector<std::size_t>{4, 7}) bad.push_back("N+ is not {5,8}");
  }
  if (!a.global.observable) bad.push_back("game should be globally observable");
  if (a.local.observable || !a.local.witness) {
    bad.push_back("game should not be locally observable");
  } else {
    const Vector want{make_rational(1, 2), make_rational(1, 6), make_rational(-1, 6),
                      make_rational(-1, 2)};
    if (a.local.witness->difference != want) bad.push_back("witness difference differs");
  }
  return bad;
}

}  // namespace bilateral::pm

#endif  // BILATERAL_GAME_JSON_HPP
