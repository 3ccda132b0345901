#ifndef BILATERAL_PARTIAL_MONITORING_HPP
#define BILATERAL_PARTIAL_MONITORING_HPP

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bilateral/rational.hpp"
#include "bilateral/trade_core.hpp"

// Exact analysis of finite partial-monitoring games: signal matrices, the cell
// decomposition of the outcome simplex, action classification, neighbors and
// global/local observability. Everything is computed in exact rationals.

namespace bilateral::pm {

using Vector = std::vector<Rational>;
using Matrix = std::vector<Vector>;

inline constexpr std::size_t kMaxOutcomes = 8;

// ---------------------------------------------------------------------------
// Exact linear algebra.

inline Rational dot(const Vector& a, const Vector& b) {
  Rational total = 0;
  for (std::size_t k = 0; k < a.size(); ++k) total += a[k] * b[k];
  return total;
}

inline Vector subtract(const Vector& a, const Vector& b) {
  Vector out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] - b[k];
  return out;
}

// Reduced row echelon form in place; returns the pivot columns.
inline std::vector<std::size_t> row_reduce(Matrix& m, std::size_t columns) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < columns && row < m.size(); ++col) {
    std::size_t pick = row;
    while (pick < m.size() && m[pick][col] == 0) ++pick;
    if (pick == m.size()) continue;
    std::swap(m[row], m[pick]);
    const Rational lead = m[row][col];
    for (auto& x : m[row]) x /= lead;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == row || m[r][col] == 0) continue;
      const Rational factor = m[r][col];
      for (std::size_t c = 0; c < m[r].size(); ++c) m[r][c] -= factor * m[row][c];
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

inline std::size_t rank(Matrix rows) {
  if (rows.empty()) return 0;
  const std::size_t columns = rows.front().size();
  return row_reduce(rows, columns).size();
}

// Solves A x = rhs for square or overdetermined A; returns nothing unless the
// solution exists and is unique.
inline std::optional<Vector> solve_unique(const Matrix& a, const Vector& rhs) {
  if (a.empty()) return std::nullopt;
  const std::size_t n = a.front().size();
  Matrix aug = a;
  for (std::size_t r = 0; r < aug.size(); ++r) aug[r].push_back(rhs[r]);
  const auto pivots = row_reduce(aug, n + 1);
  if (!pivots.empty() && pivots.back() == n) return std::nullopt;  // inconsistent
  if (pivots.size() != n) return std::nullopt;
  Vector x(n);
  for (std::size_t r = 0; r < n; ++r) x[pivots[r]] = aug[r][n];
  return x;
}

// Coefficients c with sum_r c_r rows[r] = target, or nothing if target is
// outside the span. Free coefficients are set to zero.
inline std::optional<Vector> express_in_span(const Matrix& rows, const Vector& target) {
  const std::size_t dim = target.size();
  const std::size_t count = rows.size();
  Matrix aug(dim, Vector(count + 1));
  for (std::size_t k = 0; k < dim; ++k) {
    for (std::size_t r = 0; r < count; ++r) aug[k][r] = rows[r][k];
    aug[k][count] = target[k];
  }
  const auto pivots = row_reduce(aug, count + 1);
  if (!pivots.empty() && pivots.back() == count) return std::nullopt;
  Vector coefficients(count);
  for (std::size_t r = 0; r < pivots.size(); ++r) coefficients[pivots[r]] = aug[r][count];
  return coefficients;
}

// Indices of a greedy maximal independent subset, scanned in order.
inline std::vector<std::size_t> greedy_basis(const Matrix& rows) {
  std::vector<std::size_t> chosen;
  Matrix kept;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    kept.push_back(rows[r]);
    if (rank(kept) == kept.size()) {
      chosen.push_back(r);
    } else {
      kept.pop_back();
    }
  }
  return chosen;
}

// ---------------------------------------------------------------------------
// Polytopes inside the probability simplex.

// a . x >= rhs, or a . x == rhs when equality is set.
struct Constraint {
  Vector a;
  Rational rhs;
  bool equality = false;

  bool satisfied_by(const Vector& x) const {
    const Rational lhs = dot(a, x);
    return equality ? lhs == rhs : lhs >= rhs;
  }
};

// Bounded polyhedron {x : constraints} with its vertex set and affine
// dimension (-1 when empty). Vertices come from enumerating basic solutions:
// every choice of (dim - #equalities) inequalities made tight together with the
// equalities, solved exactly and kept when feasible.
class Polytope {
 public:
  Polytope(std::size_t dimension, std::vector<Constraint> constraints)
      : ambient_(dimension), constraints_(std::move(constraints)) {
    enumerate_vertices();
  }

  std::size_t ambient_dimension() const { return ambient_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::vector<Vector>& vertices() const { return vertices_; }
  int dimension() const { return dimension_; }
  bool empty() const { return vertices_.empty(); }

  bool contains(const Vector& x) const {
    return std::all_of(constraints_.begin(), constraints_.end(),
                       [&](const Constraint& c) { return c.satisfied_by(x); });
  }

  // Inclusion by vertex containment (both sides are convex hulls of vertices).
  bool subset_of(const Polytope& other) const {
    return std::all_of(vertices_.begin(), vertices_.end(),
                       [&](const Vector& v) { return other.contains(v); });
  }

  bool strict_subset_of(const Polytope& other) const {
    if (!subset_of(other)) return false;
    if (dimension_ != other.dimension_) return true;
    return !other.subset_of(*this);
  }

  Polytope intersect(const Polytope& other) const {
    std::vector<Constraint> all = constraints_;
    all.insert(all.end(), other.constraints_.begin(), other.constraints_.end());
    return Polytope(ambient_, std::move(all));
  }

 private:
  void enumerate_vertices() {
    std::vector<const Constraint*> equalities;
    std::vector<const Constraint*> inequalities;
    for (const auto& c : constraints_) (c.equality ? equalities : inequalities).push_back(&c);
    // Keep an independent subset of the equalities; an inconsistent set is empty.
    Matrix eq_rows;
    Matrix eq_augmented;
    for (const auto* e : equalities) {
      eq_rows.push_back(e->a);
      eq_augmented.push_back(e->a);
      eq_augmented.back().push_back(e->rhs);
    }
    if (rank(eq_rows) != rank(eq_augmented)) {
      dimension_ = -1;
      return;
    }
    {
      std::vector<const Constraint*> independent;
      for (std::size_t idx : greedy_basis(eq_rows)) independent.push_back(equalities[idx]);
      equalities = std::move(independent);
    }
    if (equalities.size() > ambient_) {
      throw std::invalid_argument("polytope: more equalities than dimensions");
    }
    const std::size_t pick = ambient_ - equalities.size();
    std::set<Vector> found;
    if (pick <= inequalities.size()) {
      std::vector<std::size_t> idx(pick);
      for (std::size_t k = 0; k < pick; ++k) idx[k] = k;
      while (true) {
        Matrix a;
        Vector rhs;
        for (const auto* e : equalities) {
          a.push_back(e->a);
          rhs.push_back(e->rhs);
        }
        for (std::size_t k : idx) {
          a.push_back(inequalities[k]->a);
          rhs.push_back(inequalities[k]->rhs);
        }
        if (auto x = solve_unique(a, rhs); x && contains(*x)) found.insert(std::move(*x));
        // Next combination.
        std::size_t k = pick;
        while (k > 0 && idx[k - 1] == inequalities.size() - pick + k - 1) --k;
        if (k == 0) break;
        ++idx[k - 1];
        for (std::size_t m = k; m < pick; ++m) idx[m] = idx[m - 1] + 1;
      }
    }
    vertices_.assign(found.begin(), found.end());
    if (vertices_.empty()) {
      dimension_ = -1;
      return;
    }
    Matrix differences;
    for (std::size_t k = 1; k < vertices_.size(); ++k) {
      differences.push_back(subtract(vertices_[k], vertices_[0]));
    }
    dimension_ = static_cast<int>(rank(differences));
  }

  std::size_t ambient_;
  std::vector<Constraint> constraints_;
  std::vector<Vector> vertices_;
  int dimension_ = -1;
};

inline std::vector<Constraint> simplex_constraints(std::size_t outcomes) {
  std::vector<Constraint> out;
  for (std::size_t k = 0; k < outcomes; ++k) {
    Vector a(outcomes);
    a[k] = 1;
    out.push_back({std::move(a), Rational(0), false});
  }
  out.push_back({Vector(outcomes, Rational(1)), Rational(1), true});
  return out;
}

// ---------------------------------------------------------------------------
// Games.

struct Game {
  Matrix gain;                                  // N x M
  std::vector<std::vector<std::string>> feedback;  // N x M symbols
  std::vector<std::string> action_labels;       // optional
  std::vector<std::string> outcome_labels;      // optional

  std::size_t actions() const { return gain.size(); }
  std::size_t outcomes() const { return gain.empty() ? 0 : gain.front().size(); }

  void validate() const {
    if (gain.empty()) throw std::invalid_argument("game has no actions");
    const std::size_t m = outcomes();
    if (m == 0) throw std::invalid_argument("game has no outcomes");
    if (m > kMaxOutcomes) {
      throw std::invalid_argument("games with more than " + std::to_string(kMaxOutcomes) +
                                  " outcomes are not supported (got " + std::to_string(m) + ")");
    }
    if (feedback.size() != gain.size()) {
      throw std::invalid_argument("gain and feedback matrices have different action counts");
    }
    for (std::size_t i = 0; i < gain.size(); ++i) {
      if (gain[i].size() != m || feedback[i].size() != m) {
        throw std::invalid_argument("row " + std::to_string(i + 1) +
                                    " has the wrong number of outcomes");
      }
    }
    if (!action_labels.empty() && action_labels.size() != gain.size()) {
      throw std::invalid_argument("action label count differs from action count");
    }
    if (!outcome_labels.empty() && outcome_labels.size() != m) {
      throw std::invalid_argument("outcome label count differs from outcome count");
    }
  }

  Game scaled(const Rational& factor) const {
    Game out = *this;
    for (auto& row : out.gain) {
      for (auto& x : row) x *= factor;
    }
    return out;
  }
};

// S_i: one 0/1 row per distinct symbol of row i of H, in order of first
// appearance; (S_i)_{k,l} = 1 iff H_{i,l} is the k-th symbol.
struct SignalMatrix {
  std::vector<std::string> symbols;
  std::vector<std::vector<int>> rows;

  Vector row_vector(std::size_t k) const {
    Vector v;
    for (int x : rows[k]) v.emplace_back(x);
    return v;
  }
};

inline SignalMatrix signal_matrix(const Game& game, std::size_t action) {
  SignalMatrix sm;
  const auto& h = game.feedback.at(action);
  for (const auto& symbol : h) {
    if (std::find(sm.symbols.begin(), sm.symbols.end(), symbol) == sm.symbols.end()) {
      sm.symbols.push_back(symbol);
    }
  }
  for (const auto& symbol : sm.symbols) {
    std::vector<int> row(h.size());
    for (std::size_t l = 0; l < h.size(); ++l) row[l] = h[l] == symbol ? 1 : 0;
    sm.rows.push_back(std::move(row));
  }
  return sm;
}

inline std::vector<SignalMatrix> signal_matrices(const Game& game) {
  game.validate();
  std::vector<SignalMatrix> out;
  for (std::size_t i = 0; i < game.actions(); ++i) out.push_back(signal_matrix(game, i));
  return out;
}

// C_i = {pi in simplex : <l_i - l_j, pi> >= 0 for all j}.
inline Polytope cell(const Game& game, std::size_t action) {
  game.validate();
  if (action >= game.actions()) throw std::invalid_argument("cell: action out of range");
  auto constraints = simplex_constraints(game.outcomes());
  for (std::size_t j = 0; j < game.actions(); ++j) {
    if (j == action) continue;
    constraints.push_back({subtract(game.gain[action], game.gain[j]), Rational(0), false});
  }
  return Polytope(game.outcomes(), std::move(constraints));
}

inline std::vector<Polytope> cells(const Game& game) {
  std::vector<Polytope> out;
  for (std::size_t i = 0; i < game.actions(); ++i) out.push_back(cell(game, i));
  return out;
}

enum class ActionClass { Dominated, Degenerate, ParetoOptimal };

inline std::string to_string(ActionClass c) {
  switch (c) {
    case ActionClass::Dominated: return "dominated";
    case ActionClass::Degenerate: return "degenerate";
    case ActionClass::ParetoOptimal: return "pareto-optimal";
  }
  return "?";
}

inline std::vector<ActionClass> classify_actions(const std::vector<Polytope>& cell_list) {
  std::vector<ActionClass> out;
  for (std::size_t i = 0; i < cell_list.size(); ++i) {
    if (cell_list[i].empty()) {
      out.push_back(ActionClass::Dominated);
      continue;
    }
    bool degenerate = false;
    for (std::size_t k = 0; k < cell_list.size() && !degenerate; ++k) {
      degenerate = k != i && cell_list[i].strict_subset_of(cell_list[k]);
    }
    out.push_back(degenerate ? ActionClass::Degenerate : ActionClass::ParetoOptimal);
  }
  return out;
}

inline std::vector<ActionClass> classify_actions(const Game& game) {
  return classify_actions(cells(game));
}

struct NeighborPair {
  std::size_t first = 0;
  std::size_t second = 0;
  int intersection_dimension = -1;
  std::vector<Vector> intersection_vertices;
  std::vector<std::size_t> neighborhood;  // N+ = {k : C_i cap C_j in C_k}
};

// Pareto-optimal pairs whose cells meet in an (M-2)-dimensional polytope.
inline std::vector<NeighborPair> neighbors(const Game& game,
                                           const std::vector<Polytope>& cell_list,
                                           const std::vector<ActionClass>& classes) {
  std::vector<NeighborPair> out;
  const int target = static_cast<int>(game.outcomes()) - 2;
  for (std::size_t i = 0; i < cell_list.size(); ++i) {
    if (classes[i] != ActionClass::ParetoOptimal) continue;
    for (std::size_t j = i + 1; j < cell_list.size(); ++j) {
      if (classes[j] != ActionClass::ParetoOptimal) continue;
      const Polytope meet = cell_list[i].intersect(cell_list[j]);
      if (meet.empty() || meet.dimension() != target) continue;
      NeighborPair pair{i, j, meet.dimension(), meet.vertices(), {}};
      for (std::size_t k = 0; k < cell_list.size(); ++k) {
        if (meet.subset_of(cell_list[k])) pair.neighborhood.push_back(k);
      }
      out.push_back(std::move(pair));
    }
  }
  return out;
}

inline std::vector<NeighborPair> neighbors(const Game& game) {
  const auto cell_list = cells(game);
  return neighbors(game, cell_list, classify_actions(cell_list));
}

// A row of some signal matrix, identified by action and symbol.
struct SignalRow {
  std::size_t action = 0;
  std::size_t symbol = 0;
  Vector values;
};

inline std::vector<SignalRow> signal_rows(const std::vector<SignalMatrix>& matrices,
                                          const std::vector<std::size_t>& actions) {
  std::vector<SignalRow> out;
  for (std::size_t a : actions) {
    for (std::size_t k = 0; k < matrices[a].rows.size(); ++k) {
      out.push_back({a, k, matrices[a].row_vector(k)});
    }
  }
  return out;
}

// Greedy basis of the span of the given rows.
inline std::vector<SignalRow> span_basis(const std::vector<SignalRow>& rows) {
  Matrix m;
  for (const auto& r : rows) m.push_back(r.values);
  std::vector<SignalRow> out;
  for (std::size_t idx : greedy_basis(m)) out.push_back(rows[idx]);
  return out;
}

struct SpanCertificate {
  std::size_t first = 0;
  std::size_t second = 0;
  Vector difference;    // l_first - l_second
  Vector coefficients;  // one per basis row
};

struct GlobalObservability {
  bool observable = false;
  std::vector<SignalRow> basis;
  std::vector<SpanCertificate> certificates;  // every pair when observable
  std::optional<SpanCertificate> failure;     // first pair outside the span
};

inline Matrix basis_matrix(const std::vector<SignalRow>& basis) {
  Matrix m;
  for (const auto& r : basis) m.push_back(r.values);
  return m;
}

inline GlobalObservability global_observability(const Game& game) {
  const auto matrices = signal_matrices(game);
  std::vector<std::size_t> all(game.actions());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  GlobalObservability out;
  out.basis = span_basis(signal_rows(matrices, all));
  const Matrix basis = basis_matrix(out.basis);
  for (std::size_t i = 0; i < game.actions(); ++i) {
    for (std::size_t j = i + 1; j < game.actions(); ++j) {
      SpanCertificate cert{i, j, subtract(game.gain[i], game.gain[j]), {}};
      auto coefficients = express_in_span(basis, cert.difference);
      if (!coefficients) {
        out.failure = std::move(cert);
        out.certificates.clear();
        return out;
      }
      cert.coefficients = std::move(*coefficients);
      out.certificates.push_back(std::move(cert));
    }
  }
  out.observable = true;
  return out;
}

struct LocalPairResult {
  NeighborPair pair;
  std::vector<SignalRow> basis;  // basis of the span over N+ rows
  Vector difference;
  std::optional<Vector> coefficients;  // empty when not locally observable
};

struct LocalObservability {
  bool observable = true;
  std::vector<LocalPairResult> pairs;
  std::optional<LocalPairResult> witness;  // first failing pair
};

inline LocalObservability local_observability(const Game& game,
                                              const std::vector<NeighborPair>& pairs) {
  const auto matrices = signal_matrices(game);
  LocalObservability out;
  for (const auto& pair : pairs) {
    LocalPairResult result;
    result.pair = pair;
    result.basis = span_basis(signal_rows(matrices, pair.neighborhood));
    result.difference = subtract(game.gain[pair.first], game.gain[pair.second]);
    result.coefficients = express_in_span(basis_matrix(result.basis), result.difference);
    if (!result.coefficients && !out.witness) {
      out.observable = false;
      out.witness = result;
    }
    out.pairs.push_back(std::move(result));
  }
  return out;
}

inline LocalObservability local_observability(const Game& game) {
  return local_observability(game, neighbors(game));
}

// ---------------------------------------------------------------------------

// The 10-action, 4-outcome bilateral trade game. Actions are representative
// price pairs (seller price, buyer price) from {0, 1/3, 2/3, 1} with seller
// price <= buyer price; every continuous price pair behaves like one of them
// against the four outcomes (0,1/2), (1/3,1/2), (1/2,2/3), (1/2,1). Gains are
// GFT evaluated exactly, feedback symbols are the two acceptance bits.
inline Game bilateral_trade_game() {
  const std::vector<Rational> prices{Rational(0), make_rational(1, 3), make_rational(2, 3),
                                     Rational(1)};
  const std::vector<std::pair<Rational, Rational>> outcomes{
      {Rational(0), make_rational(1, 2)},
      {make_rational(1, 3), make_rational(1, 2)},
      {make_rational(1, 2), make_rational(2, 3)},
      {make_rational(1, 2), Rational(1)}};
  Game game;
  for (const auto& [s, b] : outcomes) {
    game.outcome_labels.push_back("(" + bilateral::to_string(s) + "," + bilateral::to_string(b) + ")");
  }
  for (std::size_t a = 0; a < prices.size(); ++a) {
    for (std::size_t c = a; c < prices.size(); ++c) {
      const Rational& seller_price = prices[a];
      const Rational& buyer_price = prices[c];
      game.action_labels.push_back("(" + bilateral::to_string(seller_price) + "," + bilateral::to_string(buyer_price) +
                                   ")");
      Vector gains;
      std::vector<std::string> symbols;
      for (const auto& [s, b] : outcomes) {
        gains.push_back(basic_gain_from_trade(seller_price, buyer_price, s, b));
        symbols.push_back(std::string("(") + (s <= seller_price ? '1' : '0') + "," +
                          (buyer_price <= b ? '1' : '0') + ")");
      }
      game.gain.push_back(std::move(gains));
      game.feedback.push_back(std::move(symbols));
    }
  }
  return game;
}

}  // namespace bilateral::pm

#endif  // BILATERAL_PARTIAL_MONITORING_HPP
