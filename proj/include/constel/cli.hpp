#pragma once

// Unified command-line driver: argument handling with config-file merging
// (flags beat the file, the file beats built-in defaults), structured JSON
// reports on standard output with a one-line human summary on standard
// error, and the wiring from subcommands to the library modules.
//
// Exit codes: 0 success, 1 error (arguments, config, coverage, I/O),
// 2 when a verification check in the report fails.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "constel/box_norm.hpp"
#include "constel/bump.hpp"
#include "constel/constellation.hpp"
#include "constel/decompose.hpp"
#include "constel/gaussian_int.hpp"
#include "constel/local_factors.hpp"
#include "constel/prime_table.hpp"
#include "constel/version.hpp"
#include "constel/weight.hpp"

namespace constel {

using ordered_json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Serialization helpers.
// ---------------------------------------------------------------------------

inline ordered_json gaussian_pair(const GaussianInt& z) {
  return ordered_json::array(
      {static_cast<long long>(z.re), static_cast<long long>(z.im)});
}

// Text form "a+bi" / "a-bi"; pure parts collapse ("3", "i", "-2i").
inline std::string gaussian_text(const GaussianInt& z) {
  if (z.im == 0) return to_string_128(z.re);
  std::string imag;
  int128 mag = abs128(z.im);
  if (mag != 1) imag = to_string_128(mag);
  imag += "i";
  if (z.re == 0) return (z.im < 0 ? "-" : "") + imag;
  return to_string_128(z.re) + (z.im < 0 ? "-" : "+") + imag;
}

// Accepts either "re,im" integer pairs or full "a+bi" text.
inline GaussianInt parse_point_arg(const std::string& text) {
  auto comma = text.find(',');
  if (comma == std::string::npos) return parse_gaussian(text);
  GaussianInt z;
  z.re = parse_gaussian(text.substr(0, comma)).re;
  GaussianInt im_part = parse_gaussian(text.substr(comma + 1));
  if (im_part.im != 0) throw std::invalid_argument("malformed point pair: '" + text + "'");
  z.im = im_part.re;
  return z;
}

inline std::vector<GaussianInt> parse_gaussian_list(const std::string& text, char sep) {
  std::vector<GaussianInt> items;
  std::string token;
  std::istringstream stream(text);
  while (std::getline(stream, token, sep)) {
    if (token.find_first_not_of(" \t") == std::string::npos) continue;
    items.push_back(parse_gaussian(token));
  }
  return items;
}

inline std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> items;
  std::string token;
  std::istringstream stream(text);
  while (std::getline(stream, token, ',')) {
    if (token.find_first_not_of(" \t") == std::string::npos) continue;
    items.push_back(std::stoi(token));
  }
  return items;
}

// ---------------------------------------------------------------------------
// Edge functions on disk: 8-byte magic, then int64 arity, edge indices,
// dimensions, then the dense value table row-major, all native-endian.
// ---------------------------------------------------------------------------

inline constexpr char kEdgeFunctionMagic[9] = "CONSTEF1";

inline void write_edge_function_file(const std::string& path, const EdgeFunction& f) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write '" + path + "'");
  file.write(kEdgeFunctionMagic, 8);
  auto put = [&](long long v) { file.write(reinterpret_cast<const char*>(&v), sizeof v); };
  put(f.arity());
  for (int j : f.edge) put(j);
  for (long long d : f.dims) put(d);
  long long total = EdgeFunction::table_size(f.dims);
  if (!f.values.empty()) {
    file.write(reinterpret_cast<const char*>(f.values.data()),
               static_cast<std::streamsize>(sizeof(double) * f.values.size()));
  } else {
    std::vector<long long> coords(f.dims.size(), 0);
    for (long long flat = 0; flat < total; ++flat) {
      long long rem = flat;
      for (int k = static_cast<int>(f.dims.size()) - 1; k >= 0; --k) {
        coords[static_cast<std::size_t>(k)] = rem % f.dims[static_cast<std::size_t>(k)];
        rem /= f.dims[static_cast<std::size_t>(k)];
      }
      double v = f.eval(coords);
      file.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  }
  if (!file) throw std::runtime_error("short write to '" + path + "'");
}

inline EdgeFunction read_edge_function_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open '" + path + "'");
  char magic[8] = {};
  file.read(magic, 8);
  if (!file || std::string(magic, 8) != std::string(kEdgeFunctionMagic, 8))
    throw std::runtime_error("'" + path + "' is not an edge-function file");
  auto get = [&]() {
    long long v = 0;
    file.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!file) throw std::runtime_error("truncated edge-function file '" + path + "'");
    return v;
  };
  long long k = get();
  if (k < 0 || k > 16) throw std::runtime_error("implausible arity in '" + path + "'");
  std::vector<int> edge;
  std::vector<long long> dims;
  for (long long i = 0; i < k; ++i) edge.push_back(static_cast<int>(get()));
  for (long long i = 0; i < k; ++i) dims.push_back(get());
  long long total = EdgeFunction::table_size(dims);
  std::vector<double> values(static_cast<std::size_t>(total), 0.0);
  file.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(sizeof(double) * values.size()));
  if (!file) throw std::runtime_error("truncated edge-function file '" + path + "'");
  return EdgeFunction::dense(std::move(edge), std::move(dims), std::move(values));
}

// Hypergraph systems on disk are small JSON documents {J, sizes, d, H}.
inline HypergraphSystem read_system_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open '" + path + "'");
  ordered_json doc;
  try {
    file >> doc;
  } catch (const std::exception& e) {
    throw std::runtime_error("malformed system file '" + path + "': " + e.what());
  }
  HypergraphSystem sys;
  sys.J = doc.at("J").get<int>();
  sys.sizes = doc.at("sizes").get<std::vector<long long>>();
  sys.d = doc.at("d").get<int>();
  for (const auto& edge : doc.at("H")) sys.H.push_back(edge.get<std::vector<int>>());
  validate_system(sys);
  return sys;
}

// ---------------------------------------------------------------------------
// Report scaffolding.
// ---------------------------------------------------------------------------

struct RunReport {
  ordered_json doc;
  std::string human;
  bool failed_checks = false;
  bool stream_compact = false;  // emit the document as a single line

  RunReport(const std::string& command, std::uint64_t seed, long long threads) {
    doc["command"] = command;
    doc["version"] = CONSTEL_VERSION;
    doc["seed"] = seed;
    doc["threads"] = threads;
    doc["config"] = ordered_json::object();
    doc["parameters"] = ordered_json::object();
    doc["results"] = ordered_json::object();
    doc["checks"] = ordered_json::array();
    doc["warnings"] = ordered_json::array();
    human = command + ": ok";
  }

  void add_check(const std::string& name, double measured, double reference, double tolerance,
                 bool pass) {
    ordered_json c;
    c["name"] = name;
    c["measured"] = measured;
    c["reference"] = reference;
    c["tolerance"] = tolerance;
    c["pass"] = pass;
    doc["checks"].push_back(c);
    if (!pass) failed_checks = true;
  }

  void warn(const std::string& text) { doc["warnings"].push_back(text); }
};

struct CliContext {
  std::ostream& out;
  std::ostream& err;
  std::uint64_t seed = 1;
  long long threads = 1;
  std::string out_file;
};

// ---------------------------------------------------------------------------
// sieve
// ---------------------------------------------------------------------------

struct SieveArgs {
  long long norm_bound = 100;
  long long list_limit = 1000;
};

inline RunReport cmd_sieve(const SieveArgs& a, const CliContext& ctx) {
  RunReport rep("sieve", ctx.seed, ctx.threads);
  rep.doc["config"]["norm_bound"] = a.norm_bound;
  rep.doc["config"]["list_limit"] = a.list_limit;
  GaussPrimeTable table = build_table(a.norm_bound);
  rep.doc["results"]["count"] = static_cast<long long>(table.entries.size());
  rep.doc["results"]["rational_prime_count"] = static_cast<long long>(table.rational_primes.size());
  ordered_json entries = ordered_json::array();
  long long listed = 0;
  for (const auto& e : table.entries) {
    if (listed >= a.list_limit) break;
    ordered_json row;
    row["p"] = gaussian_pair(e.prime);
    row["text"] = gaussian_text(e.prime);
    row["norm"] = static_cast<long long>(e.norm);
    row["kind"] = prime_kind_name(e.kind);
    entries.push_back(row);
    ++listed;
  }
  rep.doc["results"]["entries"] = entries;
  rep.doc["results"]["entries_truncated"] =
      listed < static_cast<long long>(table.entries.size());
  if (!ctx.out_file.empty()) {
    std::ofstream file(ctx.out_file);
    if (!file) throw std::runtime_error("cannot write '" + ctx.out_file + "'");
    file << table.norm_bound << "\n";
    for (const auto& e : table.entries)
      file << static_cast<long long>(e.prime.re) << " " << static_cast<long long>(e.prime.im)
           << " " << static_cast<long long>(e.norm) << " " << prime_kind_name(e.kind) << "\n";
    rep.doc["results"]["table_file"] = ctx.out_file;
  }
  rep.human = "sieve: " + std::to_string(table.entries.size()) + " canonical primes with norm <= " +
              std::to_string(a.norm_bound);
  return rep;
}

// ---------------------------------------------------------------------------
// weight
// ---------------------------------------------------------------------------

struct WeightArgs {
  long long N = 9923;
  double epsilon = 0.0078125;
  long long w = 5;
  double c_exponent = 0.05;
  std::string phi_kind = "triangle";
  std::string b_override;
  double C_phi_override = 0.0;
  long long table_bound = 10000;
  std::string at;
  bool mean = false;
  std::string mode = "exhaustive";
  long long samples = 200000;
  double tolerance = 0.3;
};

inline BumpFunction bump_by_name(const std::string& kind) {
  if (kind == "triangle") return BumpFunction::triangle();
  if (kind == "smooth" || kind == "smooth_standard") return BumpFunction::smooth_standard();
  throw std::invalid_argument("unknown bump kind '" + kind + "' (triangle, smooth)");
}

inline void embed_weight_parameters(RunReport& rep, const WeightConfig& cfg) {
  rep.doc["parameters"]["N"] = cfg.N;
  rep.doc["parameters"]["epsilon"] = cfg.epsilon;
  rep.doc["parameters"]["w"] = cfg.w;
  rep.doc["parameters"]["c_exponent"] = cfg.c_exponent;
  rep.doc["parameters"]["W"] = cfg.W;
  rep.doc["parameters"]["phi_W"] = cfg.phi_W;
  rep.doc["parameters"]["b"] = gaussian_pair(cfg.b);
  rep.doc["parameters"]["R"] = cfg.R;
  rep.doc["parameters"]["C_phi"] = cfg.C_phi;
  rep.doc["parameters"]["phi"] = cfg.phi.kind == BumpFunction::Kind::triangle
                                     ? "triangle"
                                     : (cfg.phi.kind == BumpFunction::Kind::smooth_standard
                                            ? "smooth_standard"
                                            : "user_sampled");
}

inline RunReport cmd_weight(const WeightArgs& a, const CliContext& ctx) {
  RunReport rep("weight", ctx.seed, ctx.threads);
  auto& cj = rep.doc["config"];
  cj["N"] = a.N;
  cj["epsilon"] = a.epsilon;
  cj["w"] = a.w;
  cj["c_exponent"] = a.c_exponent;
  cj["phi"] = a.phi_kind;
  cj["table_bound"] = a.table_bound;
  cj["mode"] = a.mode;
  cj["samples"] = a.samples;
  cj["tolerance"] = a.tolerance;

  GaussPrimeTable table = build_table(a.table_bound);
  WeightParams params;
  params.N = a.N;
  params.epsilon = a.epsilon;
  params.w = a.w;
  params.c_exponent = a.c_exponent;
  params.phi = bump_by_name(a.phi_kind);
  if (!a.b_override.empty()) params.b_override = parse_point_arg(a.b_override);
  params.C_phi_override = a.C_phi_override;
  WeightConfig cfg = make_weight_config(params, table);
  embed_weight_parameters(rep, cfg);

  std::ostringstream note;
  note << "weight: N=" << cfg.N << " W=" << cfg.W << " R=" << cfg.R;
  if (!a.at.empty()) {
    GaussianInt x = parse_point_arg(a.at);
    double value = nu(x, cfg, table);
    rep.doc["results"]["at"] = gaussian_pair(x);
    rep.doc["results"]["value"] = value;
    note << " value(" << gaussian_text(x) << ")=" << value;
  }
  if (a.mean) {
    MeanPlan plan;
    if (a.mode == "exhaustive")
      plan.mode = MeanPlan::Mode::exhaustive;
    else if (a.mode == "mc" || a.mode == "monte_carlo")
      plan.mode = MeanPlan::Mode::monte_carlo;
    else
      throw std::invalid_argument("unknown mean mode '" + a.mode + "' (exhaustive, mc)");
    plan.samples = a.samples;
    plan.seed = ctx.seed;
    MeanResult res = mean_nu(cfg, table, plan);
    rep.doc["results"]["mean"] = res.mean;
    rep.doc["results"]["std_error"] = res.std_error;
    rep.doc["results"]["exact"] = res.exact;
    rep.doc["results"]["evaluated"] = res.evaluated;
    rep.add_check("mean-deviation", res.mean, 1.0, a.tolerance,
                  std::fabs(res.mean - 1.0) <= a.tolerance);
    note << " mean=" << res.mean;
  }
  rep.human = note.str();
  return rep;
}

// ---------------------------------------------------------------------------
// localfactors
// ---------------------------------------------------------------------------

struct OmegaArgs {
  std::string moduli;  // ';'-separated Gaussian integers, one per condition
  std::string forms;   // ';'-separated conditions, ','-separated coefficients
  std::string shifts;  // ';'-separated Gaussian integers (defaults to zeros)
  long long W = 2;     // residue-class modulus multiplying each variable
  long long table_bound = 10000;
};

inline RunReport cmd_localfactors_omega(const OmegaArgs& a, const CliContext& ctx) {
  RunReport rep("localfactors omega", ctx.seed, ctx.threads);
  rep.doc["config"]["moduli"] = a.moduli;
  rep.doc["config"]["forms"] = a.forms;
  rep.doc["config"]["shifts"] = a.shifts;
  rep.doc["config"]["W"] = a.W;
  rep.doc["config"]["table_bound"] = a.table_bound;

  std::vector<GaussianInt> moduli = parse_gaussian_list(a.moduli, ';');
  LinearFormFamily family;
  {
    std::string token;
    std::istringstream stream(a.forms);
    while (std::getline(stream, token, ';')) {
      if (token.find_first_not_of(" \t") == std::string::npos) continue;
      family.forms.push_back(parse_gaussian_list(token, ','));
    }
  }
  if (family.forms.empty()) throw std::invalid_argument("at least one linear form required");
  family.T = static_cast<int>(family.forms.front().size());
  if (a.shifts.empty())
    family.shifts.assign(family.forms.size(), GaussianInt{0, 0});
  else
    family.shifts = parse_gaussian_list(a.shifts, ';');

  GaussPrimeTable table = build_table(a.table_bound);
  Rational crt = omega_crt(moduli, family, a.W, table);
  rep.doc["results"]["omega"] = ordered_json{{"num", to_string_128(crt.num)},
                                             {"den", to_string_128(crt.den)},
                                             {"value", to_double_128(crt.num) / to_double_128(crt.den)}};
  bool brute_ok = false;
  try {
    Rational brute = omega_bruteforce(moduli, family, a.W, table);
    brute_ok = true;
    rep.doc["results"]["bruteforce"] = ordered_json{{"num", to_string_128(brute.num)},
                                                    {"den", to_string_128(brute.den)}};
    bool agree = brute.num == crt.num && brute.den == crt.den;
    rep.add_check("oracle-agreement", to_double_128(crt.num) / to_double_128(crt.den),
                  to_double_128(brute.num) / to_double_128(brute.den), 0.0, agree);
  } catch (const std::length_error&) {
    rep.warn("bruteforce oracle skipped: enumeration exceeds its budget");
  }
  rep.human = "localfactors omega: " + to_string_128(crt.num) + "/" + to_string_128(crt.den) +
              (brute_ok ? " (bruteforce agreed)" : "");
  return rep;
}

struct ZetaArgs {
  double sigma = 1.05;
  long long cutoff = 1000000;
  bool euler = false;
  double s_imag = 0.0;
  long long w = 5;
  double bound = 5.0;
};

inline RunReport cmd_localfactors_zeta(const ZetaArgs& a, const CliContext& ctx) {
  RunReport rep("localfactors zeta", ctx.seed, ctx.threads);
  rep.doc["config"]["sigma"] = a.sigma;
  rep.doc["config"]["cutoff"] = a.cutoff;
  rep.doc["config"]["euler"] = a.euler;
  if (a.euler) {
    rep.doc["config"]["s_imag"] = a.s_imag;
    rep.doc["config"]["w"] = a.w;
    GaussPrimeTable table = build_table(a.cutoff);
    TruncatedZeta tz =
        truncated_zeta(std::complex<double>(a.sigma, a.s_imag), a.w, a.cutoff, table);
    rep.doc["results"]["value_re"] = tz.value.real();
    rep.doc["results"]["value_im"] = tz.value.imag();
    rep.doc["results"]["tail_bound"] = tz.tail_bound;
    std::ostringstream note;
    note << "localfactors zeta: euler product " << tz.value.real() << (tz.value.imag() < 0 ? "" : "+")
         << tz.value.imag() << "i (tail <= " << tz.tail_bound << ")";
    rep.human = note.str();
    return rep;
  }
  GaussZetaRemainder rem = zeta_gauss_remainder(a.sigma, a.cutoff);
  const double pi = 3.14159265358979323846;
  rep.doc["results"]["zeta_value"] = rem.zeta_value;
  rep.doc["results"]["main_term"] = pi / (a.sigma - 1.0);
  rep.doc["results"]["remainder"] = rem.remainder;
  rep.add_check("remainder-bound", rem.remainder, 0.0, a.bound,
                std::fabs(rem.remainder) <= a.bound);
  std::ostringstream note;
  note << "localfactors zeta: remainder " << rem.remainder << " at sigma=" << a.sigma;
  rep.human = note.str();
  return rep;
}

struct CphiArgs {
  std::string phi_kind = "triangle";
  long long resolution = 1 << 20;
  double tolerance = 1e-4;
  bool fourier = false;
  double T = 200.0;
  double fourier_tolerance = 1e-3;
};

inline RunReport cmd_localfactors_cphi(const CphiArgs& a, const CliContext& ctx) {
  RunReport rep("localfactors cphi", ctx.seed, ctx.threads);
  rep.doc["config"]["phi"] = a.phi_kind;
  rep.doc["config"]["resolution"] = a.resolution;
  rep.doc["config"]["fourier"] = a.fourier;
  BumpFunction phi = bump_by_name(a.phi_kind);
  double value = c_phi_prime(phi, a.resolution);
  rep.doc["results"]["value"] = value;
  std::ostringstream note;
  note << "localfactors cphi: " << value;
  if (a.phi_kind == "triangle") {
    const double closed_form = 64.0 / 3.14159265358979323846;
    rep.add_check("closed-form-gap", value, closed_form, a.tolerance,
                  std::fabs(value - closed_form) <= a.tolerance);
  }
  if (a.fourier) {
    FourierCheck fc = c_phi_prime_fourier_check(phi, a.T);
    rep.doc["results"]["fourier_value"] = fc.fourier_value;
    rep.doc["results"]["direct_value"] = fc.direct_value;
    rep.doc["results"]["relative_gap"] = fc.relative_gap;
    rep.add_check("fourier-consistency", fc.fourier_value, fc.direct_value, a.fourier_tolerance,
                  fc.relative_gap <= a.fourier_tolerance);
    note << " (fourier gap " << fc.relative_gap << ")";
  }
  rep.human = note.str();
  return rep;
}

struct GyCheckArgs {
  long long w = 5;
  long long R = 32;
  long long box = 1000000;
  std::string shift = "1";
  std::string phi_kind = "triangle";
  long long samples = 400000;
  long long exhaustive_limit = 2000000;
  long long table_bound = 10000;
  double lo = 0.8;
  double hi = 1.25;
};

inline RunReport cmd_localfactors_gycheck(const GyCheckArgs& a, const CliContext& ctx) {
  RunReport rep("localfactors gycheck", ctx.seed, ctx.threads);
  auto& cj = rep.doc["config"];
  cj["w"] = a.w;
  cj["R"] = a.R;
  cj["box"] = a.box;
  cj["shift"] = a.shift;
  cj["phi"] = a.phi_kind;
  cj["samples"] = a.samples;
  cj["exhaustive_limit"] = a.exhaustive_limit;
  cj["table_bound"] = a.table_bound;

  GaussPrimeTable table = build_table(a.table_bound);
  WModulus wm = compute_W(a.w, table);
  BumpFunction phi = bump_by_name(a.phi_kind);
  LinearFormFamily family;
  family.T = 1;
  family.forms = {{GaussianInt{1, 0}}};
  family.shifts = {parse_point_arg(a.shift)};
  std::vector<CoordBox> box = {CoordBox{0, a.box, 0, a.box}};
  GyPlan plan;
  plan.samples = a.samples;
  plan.exhaustive_limit = a.exhaustive_limit;
  plan.seed = ctx.seed;
  EmpiricalGy emp = empirical_gy(family, box, a.R, wm.W, phi, table, plan);
  double main = gy_main_term(1, wm, a.R, phi);
  double ratio = emp.value / main;

  rep.doc["parameters"]["w"] = a.w;
  rep.doc["parameters"]["W"] = wm.W;
  rep.doc["parameters"]["phi_W"] = wm.phi_W;
  rep.doc["parameters"]["R"] = a.R;
  rep.doc["results"]["empirical"] = emp.value;
  rep.doc["results"]["std_error"] = emp.std_error;
  rep.doc["results"]["sampled"] = emp.sampled;
  rep.doc["results"]["points"] = emp.points;
  rep.doc["results"]["main_term"] = main;
  rep.doc["results"]["ratio"] = ratio;
  rep.doc["results"]["window"] = ordered_json::array({a.lo, a.hi});
  if (emp.floor_warning) rep.warn("box is small against the nominal divisor-sum floor");
  rep.add_check("gy-ratio", ratio, 1.0, a.hi - 1.0, ratio >= a.lo && ratio <= a.hi);
  std::ostringstream note;
  note << "localfactors gycheck: ratio " << ratio << " (empirical " << emp.value << " / main "
       << main << ")";
  rep.human = note.str();
  return rep;
}

struct CorrCheckArgs {
  std::string v = "1";
  std::string h = "0;2";
  long long N = 9923;
  double epsilon = 0.0078125;
  long long w = 5;
  double c_exponent = 0.05;
  std::string phi_kind = "triangle";
  long long interval_start = 0;
  long long interval_length = 2000;
  double kappa = 1.0;
  double margin = 5.0;
  long long table_bound = 10000;
};

inline RunReport cmd_localfactors_corrcheck(const CorrCheckArgs& a, const CliContext& ctx) {
  RunReport rep("localfactors corrcheck", ctx.seed, ctx.threads);
  auto& cj = rep.doc["config"];
  cj["v"] = a.v;
  cj["h"] = a.h;
  cj["N"] = a.N;
  cj["epsilon"] = a.epsilon;
  cj["w"] = a.w;
  cj["c_exponent"] = a.c_exponent;
  cj["phi"] = a.phi_kind;
  cj["interval_start"] = a.interval_start;
  cj["interval_length"] = a.interval_length;
  cj["kappa"] = a.kappa;
  cj["margin"] = a.margin;
  cj["table_bound"] = a.table_bound;

  GaussPrimeTable table = build_table(a.table_bound);
  WeightParams params;
  params.N = a.N;
  params.epsilon = a.epsilon;
  params.w = a.w;
  params.c_exponent = a.c_exponent;
  params.phi = bump_by_name(a.phi_kind);
  WeightConfig cfg = make_weight_config(params, table);
  embed_weight_parameters(rep, cfg);

  CorrelationPlan plan;
  plan.interval_start = a.interval_start;
  plan.interval_length = a.interval_length;
  plan.kappa = a.kappa;
  plan.margin = a.margin;
  CorrelationReport cr =
      correlation_check(parse_point_arg(a.v), parse_gaussian_list(a.h, ';'), cfg, table, plan);
  rep.doc["results"]["lhs"] = cr.lhs;
  rep.doc["results"]["rhs"] = cr.rhs;
  rep.doc["results"]["margin"] = cr.margin;
  rep.doc["results"]["crude_path"] = cr.crude_path;
  rep.doc["results"]["delta"] = to_string_128(cr.delta_value);
  rep.doc["results"]["interval"] =
      ordered_json::array({cr.interval_start, cr.interval_length});
  rep.add_check("correlation-bound", cr.lhs, cr.rhs, cr.margin, cr.pass);
  std::ostringstream note;
  note << "localfactors corrcheck: lhs " << cr.lhs << " vs bound " << cr.rhs;
  rep.human = note.str();
  return rep;
}

// ---------------------------------------------------------------------------
// boxnorm
// ---------------------------------------------------------------------------

struct BoxnormArgs {
  std::string fn_file;
  std::string edge;
  std::string system_file;
  long long budget = 100000000;
  bool dual = false;
  std::string dual_out;
};

inline RunReport cmd_boxnorm(const BoxnormArgs& a, const CliContext& ctx) {
  RunReport rep("boxnorm", ctx.seed, ctx.threads);
  rep.doc["config"]["fn"] = a.fn_file;
  rep.doc["config"]["edge"] = a.edge;
  rep.doc["config"]["system"] = a.system_file;
  rep.doc["config"]["budget"] = a.budget;

  EdgeFunction f = read_edge_function_file(a.fn_file);
  if (!a.edge.empty()) {
    std::vector<int> requested = parse_int_list(a.edge);
    if (requested != f.edge)
      throw std::invalid_argument("--edge disagrees with the edge stored in the function file");
  }
  if (!a.system_file.empty()) {
    HypergraphSystem sys = read_system_file(a.system_file);
    if (static_cast<int>(f.edge.size()) != sys.d)
      throw std::invalid_argument("function arity does not match the system's edge arity");
    for (std::size_t k = 0; k < f.edge.size(); ++k) {
      int j = f.edge[k];
      if (j < 0 || j >= sys.J || f.dims[k] != sys.sizes[static_cast<std::size_t>(j)])
        throw std::invalid_argument("function dimensions do not match the system's classes");
    }
    bool listed = false;
    for (const auto& e : sys.H) listed = listed || e == f.edge;
    if (!listed) throw std::invalid_argument("the function's edge is not an edge of the system");
  }

  EnumerationPlan plan;
  plan.budget = a.budget;
  BoxNormResult res = box_norm(f, plan);
  rep.doc["results"]["edge"] = f.edge;
  rep.doc["results"]["dims"] = f.dims;
  rep.doc["results"]["value"] = res.value;
  rep.doc["results"]["zero_dimensional"] = res.zero_dimensional;
  std::ostringstream note;
  note << "boxnorm: " << res.value;
  if (a.dual) {
    EdgeFunction d = dual_function(f, plan);
    double inner = edge_inner(f, d, plan);
    double expected = std::pow(res.value, std::pow(2.0, f.arity()));
    rep.doc["results"]["dual_inner"] = inner;
    rep.doc["results"]["dual_identity_reference"] = expected;
    rep.add_check("dual-identity", inner, expected, 1e-9, std::fabs(inner - expected) <= 1e-9);
    if (!a.dual_out.empty()) {
      write_edge_function_file(a.dual_out, d);
      rep.doc["results"]["dual_file"] = a.dual_out;
    }
    note << " (dual inner " << inner << ")";
  }
  rep.human = note.str();
  return rep;
}

// ---------------------------------------------------------------------------
// decompose
// ---------------------------------------------------------------------------

struct DecomposeArgs {
  std::string fn_file;
  std::string nu_file;
  double epsilon = 0.1;
  double sigma = 0.001;
  long long k_max = -1;
  long long budget = 100000000;
};

inline RunReport cmd_decompose(const DecomposeArgs& a, const CliContext& ctx) {
  RunReport rep("decompose", ctx.seed, ctx.threads);
  rep.doc["config"]["fn"] = a.fn_file;
  rep.doc["config"]["nu"] = a.nu_file;
  rep.doc["config"]["epsilon"] = a.epsilon;
  rep.doc["config"]["sigma"] = a.sigma;
  rep.doc["config"]["k_max"] = a.k_max;
  rep.doc["config"]["budget"] = a.budget;
  rep.doc["parameters"]["epsilon"] = a.epsilon;
  rep.doc["parameters"]["sigma"] = a.sigma;

  EdgeFunction f = read_edge_function_file(a.fn_file);
  EdgeFunction nu = read_edge_function_file(a.nu_file);
  EnumerationPlan plan;
  plan.budget = a.budget;
  TowerState tower_state = tower(f, nu, a.epsilon, a.sigma, static_cast<int>(a.k_max), plan);

  rep.doc["results"]["K"] = tower_state.K;
  rep.doc["results"]["terminated"] = tower_state.terminated;
  rep.doc["results"]["threshold"] = tower_state.threshold;
  rep.doc["results"]["final_box_norm"] = tower_state.final_box_norm;
  rep.doc["results"]["box_norms"] = tower_state.box_norms;
  rep.doc["results"]["atom_counts"] = tower_state.atom_counts;
  rep.doc["results"]["omega_masses"] = tower_state.omega_masses;
  rep.doc["results"]["energies"] = tower_state.energies;
  rep.doc["results"]["atom_count_final"] = tower_state.B.atom_count;
  rep.add_check("tower-terminated", tower_state.final_box_norm, tower_state.threshold,
                tower_state.threshold, tower_state.terminated);
  std::ostringstream note;
  note << "decompose: K=" << tower_state.K << " final box norm " << tower_state.final_box_norm
       << (tower_state.terminated ? " (terminated)" : " (cap hit)");
  rep.human = note.str();
  return rep;
}

// ---------------------------------------------------------------------------
// search
// ---------------------------------------------------------------------------

struct SearchArgs {
  std::string shape;
  long long a_bound = 100;
  long long r_bound = 10;
  long long table_bound = 0;  // 0: smallest table covering the verification route
  bool unexceptional_only = false;
  bool normalize_shape = false;
  long long max_results = 0;
  long long checkpoint_every = 10000000;
  long long resume = 0;
};

inline RunReport cmd_search(const SearchArgs& a, const CliContext& ctx) {
  RunReport rep("search", ctx.seed, ctx.threads);
  rep.stream_compact = true;
  auto& cj = rep.doc["config"];
  cj["shape"] = a.shape;
  cj["a_bound"] = a.a_bound;
  cj["r_bound"] = a.r_bound;
  cj["table_bound"] = a.table_bound;
  cj["unexceptional_only"] = a.unexceptional_only;
  cj["normalize"] = a.normalize_shape;
  cj["max_results"] = a.max_results;
  cj["checkpoint_every"] = a.checkpoint_every;
  cj["resume"] = a.resume;

  Shape shape;
  shape.points = parse_gaussian_list(a.shape, ',');
  if (shape.points.empty()) throw std::invalid_argument("shape must contain at least one point");
  if (a.normalize_shape) shape = normalize(shape);
  ordered_json pts = ordered_json::array();
  for (const auto& v : shape.points) pts.push_back(gaussian_pair(v));
  rep.doc["parameters"]["shape_points"] = pts;
  rep.doc["parameters"]["a_bound"] = a.a_bound;
  rep.doc["parameters"]["r_bound"] = a.r_bound;

  int128 max_norm = 0;
  for (const auto& v : shape.points) {
    int128 mre = checked_add(a.a_bound, checked_mul(a.r_bound, abs128(v.re)));
    int128 mim = checked_add(a.a_bound, checked_mul(a.r_bound, abs128(v.im)));
    max_norm = std::max(max_norm, checked_add(checked_mul(mre, mre), checked_mul(mim, mim)));
  }
  long long table_bound = a.table_bound;
  if (table_bound <= 0) table_bound = std::max<long long>(
      100, static_cast<long long>(isqrt128(max_norm)) + 1);
  rep.doc["parameters"]["table_bound"] = table_bound;
  rep.doc["parameters"]["max_norm"] = static_cast<long long>(max_norm);

  GaussPrimeTable table = build_table(table_bound);
  SearchPlan plan;
  plan.unexceptional_only = a.unexceptional_only;
  plan.max_results = a.max_results;
  plan.checkpoint_every = a.checkpoint_every;
  plan.resume_index = a.resume;
  SearchResult res = search(shape, a.a_bound, a.r_bound, table, plan);

  for (const auto& c : res.found) {
    ordered_json line;
    line["r"] = c.r;
    line["a"] = gaussian_pair(c.a);
    ordered_json points = ordered_json::array();
    for (const auto& p : c.points) points.push_back(gaussian_pair(p));
    line["points"] = points;
    ctx.out << line.dump() << "\n";
  }

  rep.doc["results"]["found"] = static_cast<long long>(res.found.size());
  rep.doc["results"]["candidates_scanned"] = res.candidates_scanned;
  rep.doc["results"]["finished"] = res.finished;
  rep.doc["results"]["resume_index"] = res.resume_index;
  rep.doc["results"]["checkpoints"] = res.checkpoints;
  std::ostringstream note;
  note << "search: " << res.found.size() << " found in " << res.candidates_scanned
       << " candidates" << (res.finished ? "" : " (stopped early)");
  rep.human = note.str();
  return rep;
}

// ---------------------------------------------------------------------------
// Driver.
// ---------------------------------------------------------------------------

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  for (const auto& arg : args)
    if (arg == "--version") {
      out << "constel " << CONSTEL_VERSION << "\n";
      return 0;
    }

  auto t0 = std::chrono::steady_clock::now();

  // The config file is read before CLI parsing so that file values replace
  // the built-in defaults while explicit flags still win.
  ordered_json fcfg = ordered_json::object();
  {
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i)
      if (args[i] == "--config") {
        if (i + 1 >= args.size()) {
          err << "argument error: --config requires a file path\n";
          return 1;
        }
        config_path = args[i + 1];
      }
    if (!config_path.empty()) {
      std::ifstream file(config_path);
      if (!file) {
        err << "config error: cannot open '" << config_path << "'\n";
        return 1;
      }
      try {
        file >> fcfg;
      } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return 1;
      }
      if (!fcfg.is_object()) {
        err << "config error: the top level must be an object\n";
        return 1;
      }
    }
  }

  auto cfg_ll = [&](const char* key, long long& var) {
    if (!fcfg.contains(key)) return;
    if (!fcfg[key].is_number_integer()) throw ConfigError(std::string("'") + key + "' must be an integer");
    var = fcfg[key].get<long long>();
  };
  auto cfg_u64 = [&](const char* key, std::uint64_t& var) {
    if (!fcfg.contains(key)) return;
    if (!fcfg[key].is_number_integer()) throw ConfigError(std::string("'") + key + "' must be an integer");
    var = fcfg[key].get<std::uint64_t>();
  };
  auto cfg_d = [&](const char* key, double& var) {
    if (!fcfg.contains(key)) return;
    if (!fcfg[key].is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
    var = fcfg[key].get<double>();
  };
  auto cfg_str = [&](const char* key, std::string& var) {
    if (!fcfg.contains(key)) return;
    if (!fcfg[key].is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
    var = fcfg[key].get<std::string>();
  };
  auto cfg_phi = [&](std::string& kind) {
    if (!fcfg.contains("phi")) return;
    const auto& p = fcfg["phi"];
    if (p.is_string())
      kind = p.get<std::string>();
    else if (p.is_object() && p.contains("kind") && p["kind"].is_string())
      kind = p["kind"].get<std::string>();
    else
      throw ConfigError("'phi' must be a string or an object with a 'kind' string");
  };

  try {
    CLI::App app{"finite-scale toolkit around prime constellations in the Gaussian integers"};
    app.require_subcommand(1);

    CliContext ctx{out, err};
    std::string config_path_opt;
    bool version_flag = false;
    cfg_u64("seed", ctx.seed);
    cfg_ll("threads", ctx.threads);
    app.add_option("--threads", ctx.threads, "parallelism degree handed to the modules");
    app.add_option("--seed", ctx.seed, "seed for every stochastic estimate");
    app.add_option("--out", ctx.out_file, "write the command's file artifact here");
    app.add_option("--config", config_path_opt, "structured key-value config file (JSON)");
    app.add_flag("--version", version_flag, "print the release string and exit");

    SieveArgs sieve_args;
    cfg_ll("norm_bound", sieve_args.norm_bound);
    cfg_ll("list_limit", sieve_args.list_limit);
    auto* sc_sieve = app.add_subcommand("sieve", "enumerate canonical Gaussian primes by norm");
    sc_sieve->fallthrough();
    sc_sieve->add_option("--norm-bound", sieve_args.norm_bound, "largest norm kept in the table");
    sc_sieve->add_option("--list-limit", sieve_args.list_limit,
                         "cap on entries listed in the JSON report");

    WeightArgs weight_args;
    cfg_ll("N", weight_args.N);
    cfg_d("epsilon", weight_args.epsilon);
    cfg_ll("w", weight_args.w);
    cfg_d("c_exponent", weight_args.c_exponent);
    cfg_phi(weight_args.phi_kind);
    cfg_ll("table_bound", weight_args.table_bound);
    cfg_str("mode", weight_args.mode);
    cfg_ll("samples", weight_args.samples);
    auto* sc_weight = app.add_subcommand("weight", "evaluate the pseudorandom majorant");
    sc_weight->fallthrough();
    sc_weight->add_option("--N", weight_args.N, "prime side length of the torus");
    sc_weight->add_option("--epsilon", weight_args.epsilon, "disk radius fraction");
    sc_weight->add_option("--w", weight_args.w, "small-prime cutoff behind W");
    sc_weight->add_option("--c-exponent", weight_args.c_exponent, "truncation exponent");
    sc_weight->add_option("--phi", weight_args.phi_kind, "bump kind: triangle or smooth");
    sc_weight->add_option("--b", weight_args.b_override, "override the residue b (pair or a+bi)");
    sc_weight->add_option("--C-phi", weight_args.C_phi_override,
                          "override the normalizing constant (<=0 auto)");
    sc_weight->add_option("--table-bound", weight_args.table_bound, "prime table norm bound");
    sc_weight->add_option("--at", weight_args.at, "evaluate nu at this point (pair or a+bi)");
    sc_weight->add_flag("--mean", weight_args.mean, "estimate the mean of nu");
    sc_weight->add_option("--mode", weight_args.mode, "mean mode: exhaustive or mc");
    sc_weight->add_option("--samples", weight_args.samples, "Monte Carlo sample count");
    sc_weight->add_option("--tolerance", weight_args.tolerance, "mean deviation tolerance");

    auto* sc_lf = app.add_subcommand("localfactors", "local densities and analytic constants");
    sc_lf->require_subcommand(1);
    sc_lf->fallthrough();

    OmegaArgs omega_args;
    auto* sc_omega = sc_lf->add_subcommand("omega", "simultaneous divisibility density");
    sc_omega->fallthrough();
    sc_omega->add_option("--moduli", omega_args.moduli, "';'-separated Gaussian moduli")
        ->required();
    sc_omega->add_option("--forms", omega_args.forms,
                         "';'-separated forms, ','-separated coefficients")
        ->required();
    sc_omega->add_option("--shifts", omega_args.shifts, "';'-separated additive shifts");
    sc_omega->add_option("--W", omega_args.W, "residue-class modulus multiplying each variable");
    sc_omega->add_option("--table-bound", omega_args.table_bound, "prime table norm bound");

    ZetaArgs zeta_args;
    cfg_d("sigma", zeta_args.sigma);
    cfg_ll("cutoff", zeta_args.cutoff);
    auto* sc_zeta = sc_lf->add_subcommand("zeta", "lattice zeta remainder / Euler product");
    sc_zeta->fallthrough();
    sc_zeta->add_option("--sigma", zeta_args.sigma, "real part of s");
    sc_zeta->add_option("--cutoff", zeta_args.cutoff, "norm cutoff for the summation");
    sc_zeta->add_flag("--euler", zeta_args.euler, "truncated Euler product instead");
    sc_zeta->add_option("--s-imag", zeta_args.s_imag, "imaginary part of s (Euler path)");
    sc_zeta->add_option("--w", zeta_args.w, "lowest norm included (Euler path)");
    sc_zeta->add_option("--bound", zeta_args.bound, "remainder tolerance");

    CphiArgs cphi_args;
    cfg_phi(cphi_args.phi_kind);
    auto* sc_cphi = sc_lf->add_subcommand("cphi", "archimedean constant of the bump");
    sc_cphi->fallthrough();
    sc_cphi->add_option("--phi", cphi_args.phi_kind, "bump kind: triangle or smooth");
    sc_cphi->add_option("--resolution", cphi_args.resolution, "quadrature resolution");
    sc_cphi->add_option("--tolerance", cphi_args.tolerance, "closed-form tolerance");
    sc_cphi->add_flag("--fourier", cphi_args.fourier, "frequency-side cross-check");
    sc_cphi->add_option("--T", cphi_args.T, "frequency truncation for the cross-check");
    sc_cphi->add_option("--fourier-tolerance", cphi_args.fourier_tolerance,
                        "relative tolerance for the cross-check");

    GyCheckArgs gy_args;
    auto* sc_gy = sc_lf->add_subcommand("gycheck", "single-form correlation against the main term");
    sc_gy->fallthrough();
    sc_gy->add_option("--w", gy_args.w, "small-prime cutoff behind W");
    sc_gy->add_option("--R", gy_args.R, "truncation norm");
    sc_gy->add_option("--box", gy_args.box, "coordinate box side");
    sc_gy->add_option("--shift", gy_args.shift, "additive shift (pair or a+bi)");
    sc_gy->add_option("--phi", gy_args.phi_kind, "bump kind");
    sc_gy->add_option("--samples", gy_args.samples, "Monte Carlo sample count");
    sc_gy->add_option("--exhaustive-limit", gy_args.exhaustive_limit,
                      "largest box enumerated exactly");
    sc_gy->add_option("--table-bound", gy_args.table_bound, "prime table norm bound");
    sc_gy->add_option("--lo", gy_args.lo, "lower edge of the accepted ratio window");
    sc_gy->add_option("--hi", gy_args.hi, "upper edge of the accepted ratio window");

    CorrCheckArgs corr_args;
    cfg_ll("N", corr_args.N);
    cfg_d("epsilon", corr_args.epsilon);
    cfg_ll("w", corr_args.w);
    cfg_d("c_exponent", corr_args.c_exponent);
    cfg_phi(corr_args.phi_kind);
    auto* sc_corr = sc_lf->add_subcommand("corrcheck", "correlation along a rational line");
    sc_corr->fallthrough();
    sc_corr->add_option("--direction", corr_args.v, "probe direction (pair or a+bi)");
    sc_corr->add_option("--offsets", corr_args.h, "';'-separated offsets");
    sc_corr->add_option("--N", corr_args.N, "prime side length of the torus");
    sc_corr->add_option("--epsilon", corr_args.epsilon, "disk radius fraction");
    sc_corr->add_option("--w", corr_args.w, "small-prime cutoff behind W");
    sc_corr->add_option("--c-exponent", corr_args.c_exponent, "truncation exponent");
    sc_corr->add_option("--phi", corr_args.phi_kind, "bump kind");
    sc_corr->add_option("--interval-start", corr_args.interval_start, "first n of the interval");
    sc_corr->add_option("--interval-length", corr_args.interval_length, "interval length");
    sc_corr->add_option("--kappa", corr_args.kappa, "per-prime slack in the bound");
    sc_corr->add_option("--margin", corr_args.margin, "multiplicative margin");
    sc_corr->add_option("--table-bound", corr_args.table_bound, "prime table norm bound");

    BoxnormArgs box_args;
    cfg_ll("budget", box_args.budget);
    auto* sc_box = app.add_subcommand("boxnorm", "cube-averaged norm of an edge function");
    sc_box->fallthrough();
    sc_box->add_option("--fn", box_args.fn_file, "edge-function file")->required();
    sc_box->add_option("--edge", box_args.edge, "expected edge indices, e.g. 0,1");
    sc_box->add_option("--system", box_args.system_file, "hypergraph system file (JSON)");
    sc_box->add_option("--budget", box_args.budget, "enumeration budget");
    sc_box->add_flag("--dual", box_args.dual, "also evaluate the dual-function identity");
    sc_box->add_option("--dual-out", box_args.dual_out, "write the dual function here");

    DecomposeArgs dec_args;
    cfg_d("epsilon", dec_args.epsilon);
    cfg_d("sigma", dec_args.sigma);
    cfg_ll("k_max", dec_args.k_max);
    cfg_ll("budget", dec_args.budget);
    auto* sc_dec = app.add_subcommand("decompose", "energy-increment refinement tower");
    sc_dec->fallthrough();
    sc_dec->add_option("--fn", dec_args.fn_file, "edge-function file for f")->required();
    sc_dec->add_option("--nu", dec_args.nu_file, "edge-function file for the majorant")
        ->required();
    sc_dec->add_option("--epsilon", dec_args.epsilon, "uniformity parameter");
    sc_dec->add_option("--sigma", dec_args.sigma, "window/boundary parameter");
    sc_dec->add_option("--k-max", dec_args.k_max, "refinement cap (negative: default)");
    sc_dec->add_option("--budget", dec_args.budget, "enumeration budget");

    SearchArgs search_args;
    cfg_str("shape", search_args.shape);
    cfg_ll("a_bound", search_args.a_bound);
    cfg_ll("r_bound", search_args.r_bound);
    cfg_ll("max_results", search_args.max_results);
    cfg_ll("checkpoint_every", search_args.checkpoint_every);
    auto* sc_search = app.add_subcommand("search", "exhaustive verified constellation scan");
    sc_search->fallthrough();
    sc_search->add_option("--shape", search_args.shape, "','-separated points, e.g. 0,1,i,1+i");
    sc_search->add_option("--a-bound", search_args.a_bound, "base-point coordinate bound");
    sc_search->add_option("--r-bound", search_args.r_bound, "largest scale scanned");
    sc_search->add_option("--table-bound", search_args.table_bound,
                          "prime table norm bound (0: automatic)");
    sc_search->add_flag("--unexceptional-only", search_args.unexceptional_only,
                        "restrict every point to split primes");
    sc_search->add_flag("--normalize", search_args.normalize_shape,
                        "normalize the shape before scanning");
    sc_search->add_option("--max-results", search_args.max_results,
                          "stop after this many hits (0: no cap)");
    sc_search->add_option("--checkpoint-every", search_args.checkpoint_every,
                          "candidates between checkpoint marks");
    sc_search->add_option("--resume", search_args.resume, "linear candidate index to resume from");

    try {
      std::vector<std::string> reversed(args.rbegin(), args.rend());
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::ParseError& e) {
      err << "argument error: " << e.what() << "\n";
      return 1;
    }
    if (ctx.threads < 1) throw std::invalid_argument("--threads must be at least 1");

    RunReport rep("", ctx.seed, ctx.threads);
    if (sc_sieve->parsed())
      rep = cmd_sieve(sieve_args, ctx);
    else if (sc_weight->parsed())
      rep = cmd_weight(weight_args, ctx);
    else if (sc_omega->parsed())
      rep = cmd_localfactors_omega(omega_args, ctx);
    else if (sc_zeta->parsed())
      rep = cmd_localfactors_zeta(zeta_args, ctx);
    else if (sc_cphi->parsed())
      rep = cmd_localfactors_cphi(cphi_args, ctx);
    else if (sc_gy->parsed())
      rep = cmd_localfactors_gycheck(gy_args, ctx);
    else if (sc_corr->parsed())
      rep = cmd_localfactors_corrcheck(corr_args, ctx);
    else if (sc_box->parsed())
      rep = cmd_boxnorm(box_args, ctx);
    else if (sc_dec->parsed())
      rep = cmd_decompose(dec_args, ctx);
    else if (sc_search->parsed())
      rep = cmd_search(search_args, ctx);
    else
      throw std::invalid_argument("no subcommand selected");

    auto elapsed =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
            .count();
    rep.doc["timings"] = ordered_json{{"total_ms", elapsed}};
    out << (rep.stream_compact ? rep.doc.dump() : rep.doc.dump(2)) << "\n";
    if (!ctx.out_file.empty() && !sc_sieve->parsed()) {
      std::ofstream file(ctx.out_file);
      if (!file) throw std::runtime_error("cannot write '" + ctx.out_file + "'");
      file << rep.doc.dump(2) << "\n";
    }
    err << rep.human << "\n";
    return rep.failed_checks ? 2 : 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const CoverageError& e) {
    err << "coverage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace constel
