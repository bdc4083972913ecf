#pragma once

// Finite partitions as sigma-algebras on an edge's vertex box, conditional
// expectations, the level-set partition generated by a bounded function, the
// exceptional-set selection by atom mass, the iterative refinement tower that
// drives the structure/uniformity decomposition, and an empirical
// uniform-distribution check for products of dual functions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "constel/box_norm.hpp"

namespace constel {

// A partition of the product box described by `dims` into labeled atoms.
// Atom ids are dense in [0, atom_count) and every point carries a label.
struct Partition {
  std::vector<long long> dims;
  std::vector<int> atom_of;  // row-major over dims, size = product of dims
  int atom_count = 0;

  long long points() const { return EdgeFunction::table_size(dims); }

  static Partition trivial(std::vector<long long> dims) {
    long long n = guarded_points(dims);
    Partition b;
    b.dims = std::move(dims);
    b.atom_of.assign(static_cast<std::size_t>(n), 0);
    b.atom_count = 1;
    return b;
  }

  static Partition discrete(std::vector<long long> dims) {
    long long n = guarded_points(dims);
    Partition b;
    b.dims = std::move(dims);
    b.atom_of.resize(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) b.atom_of[static_cast<std::size_t>(i)] = static_cast<int>(i);
    b.atom_count = static_cast<int>(n);
    return b;
  }

 private:
  static long long guarded_points(const std::vector<long long>& dims) {
    long long n = EdgeFunction::table_size(dims);
    if (n > 10000000LL) throw std::length_error("partition domain is too large to label");
    return n;
  }
};

inline void validate_partition(const Partition& b) {
  long long n = b.points();
  if (static_cast<long long>(b.atom_of.size()) != n)
    throw std::invalid_argument("partition labels do not cover the domain");
  if (b.atom_count <= 0) throw std::invalid_argument("partition must have at least one atom");
  std::vector<char> seen(static_cast<std::size_t>(b.atom_count), 0);
  for (int a : b.atom_of) {
    if (a < 0 || a >= b.atom_count) throw std::invalid_argument("partition label out of range");
    seen[static_cast<std::size_t>(a)] = 1;
  }
  for (char s : seen)
    if (!s) throw std::invalid_argument("partition has an empty atom id");
}

// Common refinement: atoms are the nonempty pairwise intersections.  Ids are
// assigned in first-appearance order, so the result is dense by construction.
inline Partition join_partitions(const Partition& a, const Partition& b) {
  if (a.dims != b.dims) throw std::invalid_argument("partition join: domain mismatch");
  validate_partition(a);
  validate_partition(b);
  Partition out;
  out.dims = a.dims;
  out.atom_of.resize(a.atom_of.size());
  std::unordered_map<long long, int> ids;
  ids.reserve(a.atom_of.size());
  for (std::size_t i = 0; i < a.atom_of.size(); ++i) {
    long long key = static_cast<long long>(a.atom_of[i]) * (b.atom_count + 1LL) + b.atom_of[i];
    auto [it, fresh] = ids.emplace(key, static_cast<int>(ids.size()));
    out.atom_of[i] = it->second;
    (void)fresh;
  }
  out.atom_count = static_cast<int>(ids.size());
  return out;
}

// Materializes an edge function as a dense row-major table.
inline std::vector<double> edge_table(const EdgeFunction& f, double budget = 1e8) {
  if (!f.values.empty()) return f.values;
  long long n = EdgeFunction::table_size(f.dims);
  detail::require_budget(static_cast<double>(n), budget);
  std::vector<double> table(static_cast<std::size_t>(n));
  std::vector<long long> x(f.dims.size(), 0);
  for (long long idx = 0; idx < n; ++idx) {
    table[static_cast<std::size_t>(idx)] = f.eval(x);
    for (int i = static_cast<int>(f.dims.size()) - 1; i >= 0; --i) {
      if (++x[static_cast<std::size_t>(i)] < f.dims[static_cast<std::size_t>(i)]) break;
      x[static_cast<std::size_t>(i)] = 0;
    }
  }
  return table;
}

// Conditional expectation: replaces the function by its mean on each atom.
inline EdgeFunction cond_exp(const EdgeFunction& f, const Partition& b) {
  if (f.dims != b.dims)
    throw std::invalid_argument("conditional expectation: partition lives on a different domain");
  validate_partition(b);
  std::vector<double> table = edge_table(f);
  std::vector<double> sum(static_cast<std::size_t>(b.atom_count), 0.0);
  std::vector<long long> count(static_cast<std::size_t>(b.atom_count), 0);
  for (std::size_t i = 0; i < table.size(); ++i) {
    sum[static_cast<std::size_t>(b.atom_of[i])] += table[i];
    count[static_cast<std::size_t>(b.atom_of[i])]++;
  }
  std::vector<double> out(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    std::size_t a = static_cast<std::size_t>(b.atom_of[i]);
    out[i] = sum[a] / static_cast<double>(count[a]);
  }
  return EdgeFunction::dense(f.edge, f.dims, std::move(out));
}

// Level-set partition of a bounded function.  Atoms are the preimages of the
// half-open windows [eps*(n+alpha), eps*(n+1+alpha)); the offset alpha is
// chosen from a grid of ceil(1/sigma^2) candidates in [0,1) so as to minimize
// the weighted mass near window boundaries.  An averaging identity puts the
// grid minimum within a factor two of the mean bound 2*sigma*E(nu+1).
struct SigmaAlgebra {
  Partition partition;
  double alpha = 0.0;
  double boundary_mass = 0.0;   // E( 1[center distance <= sigma] * (nu+1) ) at the winner
  double boundary_bound = 0.0;  // 2 * (2 * sigma * E(nu+1)), the recorded guarantee
};

inline SigmaAlgebra sigma_from_function(const EdgeFunction& g, double epsilon, double sigma,
                                        const EdgeFunction& nu) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("level-set partition: window width must lie in (0,1)");
  if (!(sigma > 0.0 && sigma < 0.5))
    throw std::invalid_argument("level-set partition: boundary parameter must lie in (0,1/2)");
  if (g.dims != nu.dims)
    throw std::invalid_argument("level-set partition: weight lives on a different domain");
  std::vector<double> values = edge_table(g);
  std::vector<double> weight = edge_table(nu);
  const long long n = static_cast<long long>(values.size());

  // Fractional position of each value in window units, with its (nu+1) weight.
  std::vector<std::pair<double, double>> frac(static_cast<std::size_t>(n));
  double total_weight = 0.0;
  for (long long i = 0; i < n; ++i) {
    double u = values[static_cast<std::size_t>(i)] / epsilon;
    u -= std::floor(u);
    double w = weight[static_cast<std::size_t>(i)] + 1.0;
    frac[static_cast<std::size_t>(i)] = {u, w};
    total_weight += w;
  }
  std::sort(frac.begin(), frac.end());
  std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
  for (long long i = 0; i < n; ++i)
    prefix[static_cast<std::size_t>(i) + 1] = prefix[static_cast<std::size_t>(i)] + frac[static_cast<std::size_t>(i)].second;
  auto window_weight = [&](double lo, double hi) {
    // Total weight with fractional position in [lo, hi], both in [0,1].
    auto lower = std::lower_bound(frac.begin(), frac.end(), std::make_pair(lo, -1.0));
    auto upper = std::upper_bound(frac.begin(), frac.end(),
                                  std::make_pair(hi, std::numeric_limits<double>::infinity()));
    return prefix[static_cast<std::size_t>(upper - frac.begin())] -
           prefix[static_cast<std::size_t>(lower - frac.begin())];
  };

  long long grid = static_cast<long long>(std::ceil(1.0 / (sigma * sigma)));
  double best_alpha = 0.0;
  double best_mass = std::numeric_limits<double>::infinity();
  for (long long t = 0; t < grid; ++t) {
    double alpha = static_cast<double>(t) / static_cast<double>(grid);
    double lo = alpha - sigma;
    double hi = alpha + sigma;
    double mass;
    if (lo < 0.0)
      mass = window_weight(0.0, hi) + window_weight(lo + 1.0, 1.0);
    else if (hi > 1.0)
      mass = window_weight(lo, 1.0) + window_weight(0.0, hi - 1.0);
    else
      mass = window_weight(lo, hi);
    if (mass < best_mass) {
      best_mass = mass;
      best_alpha = alpha;
    }
  }

  SigmaAlgebra out;
  out.alpha = best_alpha;
  out.boundary_mass = best_mass / static_cast<double>(n);
  out.boundary_bound = 2.0 * (2.0 * sigma * (total_weight / static_cast<double>(n)));
  out.partition.dims = g.dims;
  out.partition.atom_of.resize(static_cast<std::size_t>(n));
  std::map<long long, int> ids;  // window index -> dense atom id, in value order
  for (long long i = 0; i < n; ++i) {
    long long window =
        static_cast<long long>(std::floor(values[static_cast<std::size_t>(i)] / epsilon - best_alpha));
    ids.emplace(window, 0);
  }
  int next = 0;
  for (auto& kv : ids) kv.second = next++;
  for (long long i = 0; i < n; ++i) {
    long long window =
        static_cast<long long>(std::floor(values[static_cast<std::size_t>(i)] / epsilon - best_alpha));
    out.partition.atom_of[static_cast<std::size_t>(i)] = ids.at(window);
  }
  out.partition.atom_count = next;
  return out;
}

// Union of the atoms whose (nu+1)-mass is at most sqrt(sigma), together with
// per-atom statistics: the mass E((nu+1) 1_A) and, for the surviving atoms,
// the deviation |E(nu - 1 | atom)|.
struct SmallAtomsReport {
  std::vector<char> omega;        // point indicator of the union of small atoms
  std::vector<int> omega_atoms;   // ids of the small atoms
  double omega_mass = 0.0;        // E((nu+1) 1_Omega)
  std::vector<double> atom_mass;  // E((nu+1) 1_A) per atom
  std::vector<double> deviation;  // |mean(nu | A) - 1| per atom
  double kappa_bound = 0.0;       // atom_count * sqrt(sigma)
};

inline SmallAtomsReport find_small_atoms(const Partition& b, const EdgeFunction& nu, double sigma) {
  if (nu.dims != b.dims)
    throw std::invalid_argument("small-atom scan: weight lives on a different domain");
  validate_partition(b);
  std::vector<double> weight = edge_table(nu);
  const double n = static_cast<double>(weight.size());
  SmallAtomsReport rep;
  rep.atom_mass.assign(static_cast<std::size_t>(b.atom_count), 0.0);
  rep.deviation.assign(static_cast<std::size_t>(b.atom_count), 0.0);
  std::vector<double> nu_sum(static_cast<std::size_t>(b.atom_count), 0.0);
  std::vector<long long> count(static_cast<std::size_t>(b.atom_count), 0);
  for (std::size_t i = 0; i < weight.size(); ++i) {
    std::size_t a = static_cast<std::size_t>(b.atom_of[i]);
    rep.atom_mass[a] += (weight[i] + 1.0) / n;
    nu_sum[a] += weight[i];
    count[a]++;
  }
  double threshold = std::sqrt(sigma);
  std::vector<char> small(static_cast<std::size_t>(b.atom_count), 0);
  for (int a = 0; a < b.atom_count; ++a) {
    rep.deviation[static_cast<std::size_t>(a)] = std::fabs(
        nu_sum[static_cast<std::size_t>(a)] / static_cast<double>(count[static_cast<std::size_t>(a)]) - 1.0);
    if (rep.atom_mass[static_cast<std::size_t>(a)] <= threshold) {
      small[static_cast<std::size_t>(a)] = 1;
      rep.omega_atoms.push_back(a);
      rep.omega_mass += rep.atom_mass[static_cast<std::size_t>(a)];
    }
  }
  rep.omega.resize(weight.size());
  for (std::size_t i = 0; i < weight.size(); ++i)
    rep.omega[i] = small[static_cast<std::size_t>(b.atom_of[i])];
  rep.kappa_bound = static_cast<double>(b.atom_count) * threshold;
  return rep;
}

// E( (1 - 1_Omega) * E(f|B)^2 ): the retained structural energy.
inline double energy(const EdgeFunction& f, const Partition& b, const std::vector<char>& omega) {
  if (f.dims != b.dims)
    throw std::invalid_argument("energy: partition lives on a different domain");
  validate_partition(b);
  std::vector<double> table = edge_table(f);
  if (omega.size() != table.size())
    throw std::invalid_argument("energy: exceptional set does not cover the domain");
  // The exceptional set must be a union of atoms.
  std::vector<signed char> atom_flag(static_cast<std::size_t>(b.atom_count), -1);
  for (std::size_t i = 0; i < omega.size(); ++i) {
    std::size_t a = static_cast<std::size_t>(b.atom_of[i]);
    signed char bit = omega[i] ? 1 : 0;
    if (atom_flag[a] == -1)
      atom_flag[a] = bit;
    else if (atom_flag[a] != bit)
      throw std::invalid_argument("energy: exceptional set is not measurable in the partition");
  }
  std::vector<double> sum(static_cast<std::size_t>(b.atom_count), 0.0);
  std::vector<long long> count(static_cast<std::size_t>(b.atom_count), 0);
  for (std::size_t i = 0; i < table.size(); ++i) {
    sum[static_cast<std::size_t>(b.atom_of[i])] += table[i];
    count[static_cast<std::size_t>(b.atom_of[i])]++;
  }
  double acc = 0.0;
  for (int a = 0; a < b.atom_count; ++a) {
    if (atom_flag[static_cast<std::size_t>(a)] == 1) continue;
    double mean = sum[static_cast<std::size_t>(a)] / static_cast<double>(count[static_cast<std::size_t>(a)]);
    acc += mean * mean * static_cast<double>(count[static_cast<std::size_t>(a)]);
  }
  return acc / static_cast<double>(table.size());
}

// The iterative refinement tower.  Starting from the trivial partition and an
// empty exceptional set, it measures F = (1 - 1_Omega)(f - E(f|B)) in the box
// norm; while the norm exceeds epsilon^(1/2^(d+1)) it refines B by the
// level-set partition of the dual of F, enlarges Omega by the small atoms of
// the refined partition, and repeats.  Hitting the iteration cap leaves the
// state flagged as non-terminated.
struct TowerState {
  int K = 0;
  Partition B;
  std::vector<char> omega;
  std::vector<EdgeFunction> generators;  // dual function used at each refinement
  std::vector<double> box_norms;         // the norm measured at each visit to the stopping test
  std::vector<int> atom_counts;          // after each refinement
  std::vector<double> omega_masses;      // E((nu+1) 1_Omega) after each enlargement
  std::vector<double> energies;          // initial energy, then after each loop
  double epsilon = 0.0;
  double sigma = 0.0;
  double threshold = 0.0;  // epsilon^(1/2^(d+1))
  double final_box_norm = 0.0;
  bool terminated = false;
};

inline TowerState tower(const EdgeFunction& f, const EdgeFunction& nu, double epsilon, double sigma,
                        int k_max = -1, const EnumerationPlan& plan = {}) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("tower: epsilon must lie in (0,1)");
  if (!(sigma > 0.0 && sigma < 0.5))
    throw std::invalid_argument("tower: sigma must lie in (0,1/2)");
  if (f.dims != nu.dims) throw std::invalid_argument("tower: weight lives on a different domain");
  std::vector<double> ftab = edge_table(f);
  std::vector<double> wtab = edge_table(nu);
  for (std::size_t i = 0; i < ftab.size(); ++i) {
    if (ftab[i] < -1e-12) throw std::invalid_argument("tower: input must be nonnegative");
    if (ftab[i] > wtab[i] + 1e-12)
      throw std::invalid_argument("tower: input escapes its majorant");
  }
  if (k_max < 0) k_max = static_cast<int>(std::ceil(32.0 / epsilon));
  const int d = f.arity();

  TowerState st;
  st.epsilon = epsilon;
  st.sigma = sigma;
  st.threshold = std::pow(epsilon, 1.0 / static_cast<double>(1LL << (d + 1)));
  Partition b = Partition::trivial(f.dims);
  std::vector<char> omega(ftab.size(), 0);
  const double n = static_cast<double>(ftab.size());
  st.energies.push_back(energy(f, b, omega));

  int k = 0;
  while (true) {
    EdgeFunction ef = cond_exp(f, b);
    std::vector<double> fvals(ftab.size());
    for (std::size_t i = 0; i < ftab.size(); ++i)
      fvals[i] = omega[i] ? 0.0 : (ftab[i] - ef.values[i]);
    EdgeFunction residual = EdgeFunction::dense(f.edge, f.dims, std::move(fvals));
    double norm = box_norm(residual, plan).value;
    st.box_norms.push_back(norm);
    st.final_box_norm = norm;
    if (norm <= st.threshold) {
      st.terminated = true;
      break;
    }
    if (k >= k_max) {
      st.terminated = false;
      break;
    }
    EdgeFunction dual = dual_function(residual, plan);
    SigmaAlgebra level = sigma_from_function(dual, epsilon, sigma, nu);
    b = join_partitions(b, level.partition);
    st.generators.push_back(std::move(dual));
    SmallAtomsReport rep = find_small_atoms(b, nu, sigma);
    for (std::size_t i = 0; i < omega.size(); ++i)
      omega[i] = static_cast<char>(omega[i] || rep.omega[i]);
    double mass = 0.0;
    for (std::size_t i = 0; i < omega.size(); ++i)
      if (omega[i]) mass += (wtab[i] + 1.0) / n;
    st.omega_masses.push_back(mass);
    st.atom_counts.push_back(b.atom_count);
    ++k;
    st.energies.push_back(energy(f, b, omega));
  }
  st.K = k;
  st.B = std::move(b);
  st.omega = std::move(omega);
  return st;
}

// Empirical uniform-distribution check: the correlation of nu - 1 against a
// product of dual functions of majorized inputs.  Optionally also reports the
// sup of |dual of (nu + 1)|, the boundedness that the dual-function condition
// asserts for the majorant itself.
struct UdpReport {
  double value = 0.0;  // |E((nu - 1) * prod_k dual(f_k))|
  int K = 0;
  double dual_nu_bound = std::numeric_limits<double>::quiet_NaN();
};

inline UdpReport udp_test(const EdgeFunction& nu, const std::vector<EdgeFunction>& generators,
                          int use_first = -1, bool dual_condition_check = false,
                          const EnumerationPlan& plan = {}) {
  std::vector<double> wtab = edge_table(nu);
  int count = use_first >= 0 ? std::min<int>(use_first, static_cast<int>(generators.size()))
                             : static_cast<int>(generators.size());
  std::vector<std::vector<double>> duals;
  for (int kk = 0; kk < count; ++kk) {
    const EdgeFunction& g = generators[static_cast<std::size_t>(kk)];
    if (g.dims != nu.dims)
      throw std::invalid_argument("uniform-distribution check: domain mismatch");
    std::vector<double> gtab = edge_table(g);
    for (std::size_t i = 0; i < gtab.size(); ++i)
      if (std::fabs(gtab[i]) > wtab[i] + 1.0 + 1e-12)
        throw std::invalid_argument("uniform-distribution check: input escapes nu + 1");
    duals.push_back(edge_table(dual_function(g, plan)));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < wtab.size(); ++i) {
    double term = wtab[i] - 1.0;
    for (const auto& dt : duals) term *= dt[i];
    acc += term;
  }
  UdpReport rep;
  rep.value = std::fabs(acc / static_cast<double>(wtab.size()));
  rep.K = count;
  if (dual_condition_check) {
    std::vector<double> bump(wtab.size());
    for (std::size_t i = 0; i < wtab.size(); ++i) bump[i] = wtab[i] + 1.0;
    std::vector<double> dual_nu =
        edge_table(dual_function(EdgeFunction::dense(nu.edge, nu.dims, std::move(bump)), plan));
    double best = 0.0;
    for (double v : dual_nu) best = std::max(best, std::fabs(v));
    rep.dual_nu_bound = best;
  }
  return rep;
}

}  // namespace constel
