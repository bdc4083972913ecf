#ifndef CONSTEL_BOX_NORM_HPP
#define CONSTEL_BOX_NORM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "constel/int128.hpp"

namespace constel {

// ---------------------------------------------------------------------------
// Hypergraph systems and edge functions.
// ---------------------------------------------------------------------------

struct HypergraphSystem {
  int J = 0;                          // vertex classes are indexed 0..J-1
  std::vector<long long> sizes;       // |V_j| per class
  int d = 1;                          // uniform edge arity
  std::vector<std::vector<int>> H;    // sorted d-subsets of {0..J-1}
};

inline void validate_system(const HypergraphSystem& sys) {
  if (sys.J < 1) throw std::invalid_argument("system needs at least one vertex class");
  if (static_cast<int>(sys.sizes.size()) != sys.J)
    throw std::invalid_argument("one size per vertex class required");
  for (long long s : sys.sizes)
    if (s < 1) throw std::invalid_argument("vertex classes must be nonempty");
  if (sys.d < 1) throw std::invalid_argument("edge arity must be at least one");
  for (const auto& e : sys.H) {
    if (static_cast<int>(e.size()) != sys.d)
      throw std::invalid_argument("every edge must have the declared arity");
    for (std::size_t k = 0; k < e.size(); ++k) {
      if (e[k] < 0 || e[k] >= sys.J) throw std::invalid_argument("edge index out of range");
      if (k > 0 && e[k] <= e[k - 1])
        throw std::invalid_argument("edges must be strictly increasing index lists");
    }
  }
}

// A real-valued function on the product of the vertex classes named by `edge`,
// held either as a dense row-major table or as a pure evaluation rule.
struct EdgeFunction {
  std::vector<int> edge;              // sorted ascending class indices
  std::vector<long long> dims;        // |V_j| per edge position
  std::vector<double> values;         // dense storage (empty when lazy)
  std::function<double(const std::vector<long long>&)> rule;  // lazy storage

  static long long table_size(const std::vector<long long>& dims) {
    int128 n = 1;
    for (long long d : dims) {
      if (d < 1) throw std::invalid_argument("edge dimensions must be positive");
      n = checked_mul(n, int128(d));
      if (n > int128(1) << 40) throw std::length_error("dense edge table too large");
    }
    return static_cast<long long>(n);
  }

  static void check_edge(const std::vector<int>& edge, const std::vector<long long>& dims) {
    if (edge.size() != dims.size())
      throw std::invalid_argument("one dimension per edge position required");
    for (std::size_t k = 1; k < edge.size(); ++k)
      if (edge[k] <= edge[k - 1])
        throw std::invalid_argument("edge must be a strictly increasing index list");
  }

  static EdgeFunction dense(std::vector<int> edge, std::vector<long long> dims,
                            std::vector<double> values) {
    check_edge(edge, dims);
    if (static_cast<long long>(values.size()) != table_size(dims))
      throw std::invalid_argument("dense table size does not match the edge dimensions");
    EdgeFunction f;
    f.edge = std::move(edge);
    f.dims = std::move(dims);
    f.values = std::move(values);
    return f;
  }

  static EdgeFunction lazy(std::vector<int> edge, std::vector<long long> dims,
                           std::function<double(const std::vector<long long>&)> rule) {
    check_edge(edge, dims);
    if (!rule) throw std::invalid_argument("lazy edge function needs an evaluation rule");
    EdgeFunction f;
    f.edge = std::move(edge);
    f.dims = std::move(dims);
    f.rule = std::move(rule);
    return f;
  }

  static EdgeFunction constant(std::vector<int> edge, std::vector<long long> dims, double c) {
    check_edge(edge, dims);
    EdgeFunction f;
    f.edge = std::move(edge);
    f.dims = std::move(dims);
    f.rule = [c](const std::vector<long long>&) { return c; };
    return f;
  }

  int arity() const { return static_cast<int>(edge.size()); }

  double eval(const std::vector<long long>& local) const {
    if (local.size() != dims.size())
      throw std::invalid_argument("coordinate arity does not match the edge");
    if (!values.empty()) {
      long long idx = 0;
      for (std::size_t k = 0; k < dims.size(); ++k) {
        if (local[k] < 0 || local[k] >= dims[k])
          throw std::out_of_range("edge coordinate out of range");
        idx = idx * dims[k] + local[k];
      }
      return values[static_cast<std::size_t>(idx)];
    }
    return rule(local);
  }
};

struct EnumerationPlan {
  long long budget = 100000000;  // maximum evaluated terms for exact paths
  bool allow_sampling = false;   // Monte Carlo fallback past the budget
  long long samples = 400000;
  std::uint64_t seed = 1;
};

namespace detail {
inline void require_budget(double terms, long long budget) {
  if (!(terms <= static_cast<double>(budget)))
    throw std::length_error("enumeration exceeds the configured budget");
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Box norms and dual functions.
// ---------------------------------------------------------------------------

struct BoxNormResult {
  double value = 0.0;
  bool zero_dimensional = false;  // empty edge: the signed value is passed through
};

// The 2^|e|-fold cube average of f, raised to 1/2^|e|.  The evaluation nests a
// plain average over one distinguished coordinate inside squares, which keeps
// every accumulated term a square (hence the result nonnegative) and costs
// (prod dims)^2 / max_dim * max_dim * 2^(|e|-1) evaluations.
inline BoxNormResult box_norm(const EdgeFunction& f, const EnumerationPlan& plan = {}) {
  const int k = f.arity();
  BoxNormResult out;
  if (k == 0) {
    out.value = f.eval({});
    out.zero_dimensional = true;
    return out;
  }
  int inner = 0;
  for (int i = 1; i < k; ++i)
    if (f.dims[static_cast<std::size_t>(i)] > f.dims[static_cast<std::size_t>(inner)]) inner = i;
  double pairs_count = 1.0;
  for (int i = 0; i < k; ++i)
    if (i != inner)
      pairs_count *= static_cast<double>(f.dims[static_cast<std::size_t>(i)]) *
                     static_cast<double>(f.dims[static_cast<std::size_t>(i)]);
  const int outer = k - 1;
  const long long cube = 1LL << outer;
  detail::require_budget(pairs_count * static_cast<double>(f.dims[static_cast<std::size_t>(inner)]) *
                             static_cast<double>(cube),
                         plan.budget);
  std::vector<int> outer_pos;
  for (int i = 0; i < k; ++i)
    if (i != inner) outer_pos.push_back(i);
  std::vector<long long> lo(static_cast<std::size_t>(outer), 0);
  std::vector<long long> hi(static_cast<std::size_t>(outer), 0);
  std::vector<long long> coords(static_cast<std::size_t>(k), 0);
  const long long inner_size = f.dims[static_cast<std::size_t>(inner)];
  double total = 0.0;
  bool done = false;
  while (!done) {
    double inner_sum = 0.0;
    for (long long x = 0; x < inner_size; ++x) {
      double prod = 1.0;
      for (long long mask = 0; mask < cube && prod != 0.0; ++mask) {
        for (int i = 0; i < outer; ++i) {
          bool one = ((mask >> i) & 1) != 0;
          coords[static_cast<std::size_t>(outer_pos[static_cast<std::size_t>(i)])] =
              one ? hi[static_cast<std::size_t>(i)] : lo[static_cast<std::size_t>(i)];
        }
        coords[static_cast<std::size_t>(inner)] = x;
        prod *= f.eval(coords);
      }
      inner_sum += prod;
    }
    inner_sum /= static_cast<double>(inner_size);
    total += inner_sum * inner_sum;
    done = true;
    for (int pos = 0; pos < 2 * outer; ++pos) {
      std::vector<long long>& side = (pos % 2 == 0) ? lo : hi;
      int i = pos / 2;
      long long limit = f.dims[static_cast<std::size_t>(outer_pos[static_cast<std::size_t>(i)])];
      if (++side[static_cast<std::size_t>(i)] < limit) {
        done = false;
        break;
      }
      side[static_cast<std::size_t>(i)] = 0;
    }
  }
  double average = total / pairs_count;
  out.value = std::pow(average, 1.0 / static_cast<double>(1LL << k));
  return out;
}

// D_e f at x0 is the cube product with the x0 corner removed, averaged over
// the opposite corner; correlating f against it recovers the box norm:
// E(f * D_e f) equals box_norm(f)^(2^|e|).
inline EdgeFunction dual_function(const EdgeFunction& f, const EnumerationPlan& plan = {}) {
  const int k = f.arity();
  if (k < 1) throw std::invalid_argument("dual function needs at least one coordinate");
  long long table = EdgeFunction::table_size(f.dims);
  const long long cube = 1LL << k;
  detail::require_budget(static_cast<double>(table) * static_cast<double>(table) *
                             static_cast<double>(cube - 1),
                         plan.budget);
  std::vector<double> values(static_cast<std::size_t>(table), 0.0);
  std::vector<long long> x0(static_cast<std::size_t>(k), 0);
  std::vector<long long> x1(static_cast<std::size_t>(k), 0);
  std::vector<long long> coords(static_cast<std::size_t>(k), 0);
  for (long long out_idx = 0; out_idx < table; ++out_idx) {
    double sum = 0.0;
    std::fill(x1.begin(), x1.end(), 0);
    bool done = false;
    while (!done) {
      double prod = 1.0;
      for (long long mask = 1; mask < cube && prod != 0.0; ++mask) {
        for (int i = 0; i < k; ++i)
          coords[static_cast<std::size_t>(i)] = ((mask >> i) & 1) != 0
                                                    ? x1[static_cast<std::size_t>(i)]
                                                    : x0[static_cast<std::size_t>(i)];
        prod *= f.eval(coords);
      }
      sum += prod;
      done = true;
      for (int i = 0; i < k; ++i) {
        if (++x1[static_cast<std::size_t>(i)] < f.dims[static_cast<std::size_t>(i)]) {
          done = false;
          break;
        }
        x1[static_cast<std::size_t>(i)] = 0;
      }
    }
    values[static_cast<std::size_t>(out_idx)] = sum / static_cast<double>(table);
    for (int i = k - 1; i >= 0; --i) {
      if (++x0[static_cast<std::size_t>(i)] < f.dims[static_cast<std::size_t>(i)]) break;
      x0[static_cast<std::size_t>(i)] = 0;
    }
  }
  return EdgeFunction::dense(f.edge, f.dims, std::move(values));
}

// Plain correlation of a function on e against f, over V_e.
inline double edge_inner(const EdgeFunction& f, const EdgeFunction& g,
                         const EnumerationPlan& plan = {}) {
  if (f.edge != g.edge || f.dims != g.dims)
    throw std::invalid_argument("inner product needs matching edges");
  long long table = EdgeFunction::table_size(f.dims);
  detail::require_budget(static_cast<double>(table), plan.budget);
  std::vector<long long> x(f.dims.size(), 0);
  double sum = 0.0;
  for (long long idx = 0; idx < table; ++idx) {
    sum += f.eval(x) * g.eval(x);
    for (std::size_t i = f.dims.size(); i-- > 0;) {
      if (++x[i] < f.dims[i]) break;
      x[i] = 0;
    }
  }
  return sum / static_cast<double>(table);
}

// ---------------------------------------------------------------------------
// Joint averages over the whole system.
// ---------------------------------------------------------------------------

namespace detail {
inline void check_edge_functions(const HypergraphSystem& sys,
                                 const std::vector<EdgeFunction>& fns) {
  if (fns.size() != sys.H.size())
    throw std::invalid_argument("one edge function per system edge required");
  for (std::size_t i = 0; i < fns.size(); ++i) {
    if (fns[i].edge != sys.H[i])
      throw std::invalid_argument("edge function does not match the system edge");
    for (std::size_t k = 0; k < fns[i].edge.size(); ++k)
      if (fns[i].dims[k] != sys.sizes[static_cast<std::size_t>(fns[i].edge[k])])
        throw std::invalid_argument("edge dimensions do not match the vertex classes");
  }
}
}  // namespace detail

// E over x in V_J of the product of the edge functions at their projections.
inline double gvn_average(const HypergraphSystem& sys, const std::vector<EdgeFunction>& fns,
                          const EnumerationPlan& plan = {}) {
  validate_system(sys);
  detail::check_edge_functions(sys, fns);
  double total_points = 1.0;
  for (long long s : sys.sizes) total_points *= static_cast<double>(s);
  std::vector<std::vector<long long>> locals;
  locals.reserve(fns.size());
  for (const auto& f : fns) locals.emplace_back(f.edge.size(), 0);
  auto term = [&](const std::vector<long long>& x) {
    double prod = 1.0;
    for (std::size_t i = 0; i < fns.size() && prod != 0.0; ++i) {
      for (std::size_t k = 0; k < fns[i].edge.size(); ++k)
        locals[i][k] = x[static_cast<std::size_t>(fns[i].edge[k])];
      prod *= fns[i].eval(locals[i]);
    }
    return prod;
  };
  std::vector<long long> x(static_cast<std::size_t>(sys.J), 0);
  if (total_points <= static_cast<double>(plan.budget)) {
    long long total = static_cast<long long>(total_points);
    double sum = 0.0;
    for (long long idx = 0; idx < total; ++idx) {
      sum += term(x);
      for (int j = 0; j < sys.J; ++j) {
        if (++x[static_cast<std::size_t>(j)] < sys.sizes[static_cast<std::size_t>(j)]) break;
        x[static_cast<std::size_t>(j)] = 0;
      }
    }
    return sum / total_points;
  }
  if (!plan.allow_sampling)
    throw std::length_error("enumeration exceeds the configured budget");
  std::mt19937_64 rng(plan.seed);
  double sum = 0.0;
  for (long long s = 0; s < plan.samples; ++s) {
    for (int j = 0; j < sys.J; ++j) {
      std::uniform_int_distribution<long long> dist(0, sys.sizes[static_cast<std::size_t>(j)] - 1);
      x[static_cast<std::size_t>(j)] = dist(rng);
    }
    sum += term(x);
  }
  return sum / static_cast<double>(plan.samples);
}

// The Cauchy-Schwarz ladder quantity: variables are doubled on Jp only; edges
// containing Jp contribute their f over the full Jp-cube of sign patterns,
// and the remaining edges contribute their majorant over the cube of patterns
// on their overlap with Jp.
inline double q_quantity(const std::vector<int>& Jp, const HypergraphSystem& sys,
                         const std::vector<EdgeFunction>& fns,
                         const std::vector<EdgeFunction>& nus,
                         const EnumerationPlan& plan = {}) {
  validate_system(sys);
  detail::check_edge_functions(sys, fns);
  detail::check_edge_functions(sys, nus);
  std::vector<bool> doubled(static_cast<std::size_t>(sys.J), false);
  for (int j : Jp) {
    if (j < 0 || j >= sys.J) throw std::invalid_argument("doubling index out of range");
    if (doubled[static_cast<std::size_t>(j)])
      throw std::invalid_argument("doubling indices must be distinct");
    doubled[static_cast<std::size_t>(j)] = true;
  }
  // Pointwise domination |f_e| <= nu_e is part of the contract.
  for (std::size_t i = 0; i < fns.size(); ++i) {
    long long table = EdgeFunction::table_size(fns[i].dims);
    detail::require_budget(static_cast<double>(table), plan.budget);
    std::vector<long long> x(fns[i].dims.size(), 0);
    for (long long idx = 0; idx < table; ++idx) {
      if (std::fabs(fns[i].eval(x)) > nus[i].eval(x) + 1e-12)
        throw std::invalid_argument("edge function escapes its majorant");
      for (std::size_t k = fns[i].dims.size(); k-- > 0;) {
        if (++x[k] < fns[i].dims[k]) break;
        x[k] = 0;
      }
    }
  }
  double total_points = 1.0;
  for (int j = 0; j < sys.J; ++j) {
    double s = static_cast<double>(sys.sizes[static_cast<std::size_t>(j)]);
    total_points *= doubled[static_cast<std::size_t>(j)] ? s * s : s;
  }
  detail::require_budget(total_points, plan.budget);
  // Per edge: which positions vary over the sign cube, and whether f or nu acts.
  struct EdgeRole {
    bool uses_f = false;              // Jp subset of e
    std::vector<int> cube_positions;  // positions of e inside Jp
  };
  std::vector<EdgeRole> roles(fns.size());
  for (std::size_t i = 0; i < fns.size(); ++i) {
    bool contains = true;
    for (int j = 0; j < sys.J; ++j)
      if (doubled[static_cast<std::size_t>(j)] &&
          !std::binary_search(sys.H[i].begin(), sys.H[i].end(), j))
        contains = false;
    roles[i].uses_f = contains;
    for (std::size_t k = 0; k < sys.H[i].size(); ++k)
      if (doubled[static_cast<std::size_t>(sys.H[i][k])])
        roles[i].cube_positions.push_back(static_cast<int>(k));
  }
  std::vector<long long> x0(static_cast<std::size_t>(sys.J), 0);
  std::vector<long long> x1(static_cast<std::size_t>(sys.J), 0);
  std::vector<long long> local;
  double sum = 0.0;
  long long total = static_cast<long long>(total_points);
  for (long long idx = 0; idx < total; ++idx) {
    double prod = 1.0;
    for (std::size_t i = 0; i < fns.size() && prod != 0.0; ++i) {
      const EdgeFunction& fn = roles[i].uses_f ? fns[i] : nus[i];
      const auto& cube_pos = roles[i].cube_positions;
      const long long cube = 1LL << cube_pos.size();
      local.assign(fn.edge.size(), 0);
      for (std::size_t k = 0; k < fn.edge.size(); ++k)
        local[k] = x0[static_cast<std::size_t>(fn.edge[k])];
      for (long long mask = 0; mask < cube && prod != 0.0; ++mask) {
        for (std::size_t c = 0; c < cube_pos.size(); ++c) {
          int pos = cube_pos[c];
          int j = fn.edge[static_cast<std::size_t>(pos)];
          local[static_cast<std::size_t>(pos)] = ((mask >> c) & 1) != 0
                                                     ? x1[static_cast<std::size_t>(j)]
                                                     : x0[static_cast<std::size_t>(j)];
        }
        prod *= fn.eval(local);
      }
    }
    sum += prod;
    // Odometer over x0 everywhere plus x1 on the doubled classes.
    bool carried = false;
    for (int pos = 0; pos < 2 * sys.J && !carried; ++pos) {
      int j = pos / 2;
      bool second = (pos % 2 == 1);
      if (second && !doubled[static_cast<std::size_t>(j)]) continue;
      std::vector<long long>& reg = second ? x1 : x0;
      if (++reg[static_cast<std::size_t>(j)] < sys.sizes[static_cast<std::size_t>(j)])
        carried = true;
      else
        reg[static_cast<std::size_t>(j)] = 0;
    }
  }
  return sum / total_points;
}

// ---------------------------------------------------------------------------
// Lifting subsets of a group to a hypergraph system.
// ---------------------------------------------------------------------------

struct FiniteGroup {
  int order = 1;
  std::vector<std::vector<int>> add;  // full addition table
  int zero = 0;
  std::vector<int> neg;

  int plus(int a, int b) const { return add[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; }
  int minus(int a, int b) const { return plus(a, neg[static_cast<std::size_t>(b)]); }
};

inline FiniteGroup make_group(const std::vector<std::vector<int>>& add) {
  FiniteGroup g;
  g.order = static_cast<int>(add.size());
  if (g.order < 1) throw std::invalid_argument("group needs at least one element");
  for (const auto& row : add) {
    if (static_cast<int>(row.size()) != g.order)
      throw std::invalid_argument("addition table must be square");
    for (int v : row)
      if (v < 0 || v >= g.order) throw std::invalid_argument("table entry out of range");
  }
  g.add = add;
  int zero = -1;
  for (int z = 0; z < g.order; ++z) {
    bool ok = true;
    for (int a = 0; a < g.order && ok; ++a)
      ok = (g.plus(z, a) == a) && (g.plus(a, z) == a);
    if (ok) {
      zero = z;
      break;
    }
  }
  if (zero < 0) throw std::invalid_argument("table has no identity element");
  g.zero = zero;
  g.neg.assign(static_cast<std::size_t>(g.order), -1);
  for (int a = 0; a < g.order; ++a) {
    for (int b = 0; b < g.order; ++b)
      if (g.plus(a, b) == zero && g.plus(b, a) == zero) {
        g.neg[static_cast<std::size_t>(a)] = b;
        break;
      }
    if (g.neg[static_cast<std::size_t>(a)] < 0)
      throw std::invalid_argument("table element without an inverse");
  }
  for (int a = 0; a < g.order; ++a)
    for (int b = 0; b < g.order; ++b)
      for (int c = 0; c < g.order; ++c)
        if (g.plus(g.plus(a, b), c) != g.plus(a, g.plus(b, c)))
          throw std::invalid_argument("addition table is not associative");
  return g;
}

inline FiniteGroup cyclic_group(int n) {
  std::vector<std::vector<int>> add(static_cast<std::size_t>(n),
                                    std::vector<int>(static_cast<std::size_t>(n), 0));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) add[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = (a + b) % n;
  return make_group(add);
}

struct HypergraphLift {
  HypergraphSystem system;
  std::vector<EdgeFunction> edge_indicators;  // one per system edge, same order
  FiniteGroup domain;       // Z, the common vertex class
  FiniteGroup codomain;     // Z', where the lifted set lives
  std::vector<std::vector<int>> homs;
  std::vector<int> set_indicator;  // membership table of A inside Z'

  // The factor map sending a configuration to (sum of images, minus sum).
  std::pair<int, int> factor_map(const std::vector<long long>& x) const {
    int a = codomain.zero;
    int r = domain.zero;
    for (std::size_t j = 0; j < homs.size(); ++j) {
      a = codomain.plus(a, homs[j][static_cast<std::size_t>(x[j])]);
      r = domain.plus(r, static_cast<int>(x[j]));
    }
    return {a, domain.neg[static_cast<std::size_t>(r)]};
  }
};

// Builds the hypergraph realization of a subset A of Z': one vertex class Z
// per homomorphism, edges all co-singleton subsets, and for e = J \ {j} the
// membership set {x : sum over i in e of (phi_i - phi_j)(x_i) lies in A}.
inline HypergraphLift lift_to_hypergraph(const FiniteGroup& Z, const FiniteGroup& Zp,
                                         const std::vector<std::vector<int>>& homs,
                                         const std::vector<int>& set_indicator) {
  const int J = static_cast<int>(homs.size());
  if (J < 2) throw std::invalid_argument("need at least two homomorphisms");
  if (static_cast<int>(set_indicator.size()) != Zp.order)
    throw std::invalid_argument("set indicator must cover the codomain");
  for (const auto& phi : homs) {
    if (static_cast<int>(phi.size()) != Z.order)
      throw std::invalid_argument("homomorphism must cover the domain");
    for (int v : phi)
      if (v < 0 || v >= Zp.order) throw std::invalid_argument("homomorphism value out of range");
    for (int a = 0; a < Z.order; ++a)
      for (int b = 0; b < Z.order; ++b)
        if (phi[static_cast<std::size_t>(Z.plus(a, b))] !=
            Zp.plus(phi[static_cast<std::size_t>(a)], phi[static_cast<std::size_t>(b)]))
          throw std::invalid_argument("map is not a homomorphism");
  }
  HypergraphLift lift;
  lift.domain = Z;
  lift.codomain = Zp;
  lift.homs = homs;
  lift.set_indicator = set_indicator;
  lift.system.J = J;
  lift.system.sizes.assign(static_cast<std::size_t>(J), Z.order);
  lift.system.d = J - 1;
  for (int j = 0; j < J; ++j) {
    std::vector<int> e;
    for (int i = 0; i < J; ++i)
      if (i != j) e.push_back(i);
    lift.system.H.push_back(e);
  }
  validate_system(lift.system);
  for (int j = 0; j < J; ++j) {
    const std::vector<int>& e = lift.system.H[static_cast<std::size_t>(j)];
    std::vector<long long> dims(e.size(), Z.order);
    long long table = EdgeFunction::table_size(dims);
    std::vector<double> values(static_cast<std::size_t>(table), 0.0);
    std::vector<long long> x(e.size(), 0);
    for (long long idx = 0; idx < table; ++idx) {
      int acc = Zp.zero;
      for (std::size_t k = 0; k < e.size(); ++k) {
        int i = e[k];
        int img = Zp.minus(homs[static_cast<std::size_t>(i)][static_cast<std::size_t>(x[k])],
                           homs[static_cast<std::size_t>(j)][static_cast<std::size_t>(x[k])]);
        acc = Zp.plus(acc, img);
      }
      values[static_cast<std::size_t>(idx)] =
          set_indicator[static_cast<std::size_t>(acc)] != 0 ? 1.0 : 0.0;
      for (std::size_t k = e.size(); k-- > 0;) {
        if (++x[k] < static_cast<long long>(Z.order)) break;
        x[k] = 0;
      }
    }
    lift.edge_indicators.push_back(EdgeFunction::dense(e, dims, std::move(values)));
  }
  return lift;
}

// ---------------------------------------------------------------------------
// Correlation against lower-order sets.
// ---------------------------------------------------------------------------

// E over V_e of f times the product of indicator functions living on proper
// subsets of e; a set on e itself is rejected.
inline double lower_order_correlation(const EdgeFunction& f,
                                      const std::vector<EdgeFunction>& lower_sets,
                                      const EnumerationPlan& plan = {}) {
  const int k = f.arity();
  if (k < 1) throw std::invalid_argument("need at least one coordinate");
  std::vector<std::vector<int>> positions;  // positions of each lower edge inside e
  for (const auto& s : lower_sets) {
    if (s.edge.size() >= f.edge.size())
      throw std::invalid_argument("lower-order sets must live on proper subsets");
    std::vector<int> pos;
    for (std::size_t i = 0; i < s.edge.size(); ++i) {
      auto it = std::lower_bound(f.edge.begin(), f.edge.end(), s.edge[i]);
      if (it == f.edge.end() || *it != s.edge[i])
        throw std::invalid_argument("lower-order sets must live on subsets of the edge");
      std::size_t p = static_cast<std::size_t>(it - f.edge.begin());
      if (s.dims[i] != f.dims[p]) throw std::invalid_argument("subset dimensions must agree");
      pos.push_back(static_cast<int>(p));
    }
    positions.push_back(std::move(pos));
  }
  long long table = EdgeFunction::table_size(f.dims);
  detail::require_budget(static_cast<double>(table), plan.budget);
  std::vector<long long> x(f.dims.size(), 0);
  std::vector<long long> local;
  double sum = 0.0;
  for (long long idx = 0; idx < table; ++idx) {
    double prod = f.eval(x);
    for (std::size_t s = 0; s < lower_sets.size() && prod != 0.0; ++s) {
      local.assign(lower_sets[s].edge.size(), 0);
      for (std::size_t i = 0; i < local.size(); ++i)
        local[i] = x[static_cast<std::size_t>(positions[s][i])];
      prod *= lower_sets[s].eval(local);
    }
    sum += prod;
    for (std::size_t i = f.dims.size(); i-- > 0;) {
      if (++x[i] < f.dims[i]) break;
      x[i] = 0;
    }
  }
  return sum / static_cast<double>(table);
}

}  // namespace constel

#endif
