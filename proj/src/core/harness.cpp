// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#include "mslab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <fftw3.h>
#include <json.hpp>

#include "mslab/error.hpp"
#include "mslab/orlicz.hpp"
#include "mslab/parallel.hpp"
#include "mslab/symbols.hpp"
#include "mslab/weights.hpp"

namespace mslab {

using json = nlohmann::json;

namespace {

constexpr const char* kSchema = "mslab.report/1";
constexpr const char* kVersion = "0.1.0";
constexpr int kLevels = 32;

// --- config parsing ---------------------------------------------------------------

const json& require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(std::string("missing config field '") + key + "'");
  return *it;
}

void allow_fields(const json& obj, const std::string& where,
                  std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; })) {
      throw ConfigError("unknown field '" + it.key() + "' in " + where);
    }
  }
}

double get_number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + " must be a number");
  return v.get<double>();
}

int get_int(const json& v, const std::string& what) {
  if (!v.is_number_integer()) throw ConfigError(what + " must be an integer");
  return v.get<int>();
}

std::vector<std::string> get_string_list(const json& v, const std::string& what) {
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array() || v.empty()) throw ConfigError(what + " must be a string or a list of strings");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw ConfigError(what + " entries must be strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

bool has_grid(const std::string& id) { return id != "P31scale" && id != "P32scale"; }

int symbol_arity(const TrialConfig& cfg) { return symbol_from_spec(cfg.symbol).arity(); }

// Per-slot strings: a single entry is shared by every slot.
std::string slot_spec(const std::vector<std::string>& specs, std::size_t slot) {
  return specs.size() == 1 ? specs.front() : specs.at(slot);
}

TQuad resolved_tquad(const TrialConfig& cfg) {
  if (cfg.tquad) return *cfg.tquad;
  return default_tquad(Grid(cfg.dim, cfg.n, cfg.box_length));
}

int resolved_deg(const TrialConfig& cfg) { return cfg.ensemble.deg > 0 ? cfg.ensemble.deg : cfg.n / 8; }

json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double read_number(const json& v) {
  if (v.is_number()) return v.get<double>();
  const auto s = v.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

json config_to_json(const TrialConfig& cfg) {
  json j;
  j["theorem_id"] = cfg.theorem_id;
  j["grid"] = {{"dim", cfg.dim}, {"N", cfg.n}, {"L", cfg.box_length}};
  j["symbol"] = cfg.symbol;
  j["exponents"] = {{"p0", cfg.exponents.p0},       {"p_list", cfg.exponents.p_list},
                    {"s", cfg.exponents.s},         {"eps1", cfg.exponents.eps1},
                    {"eps2", cfg.exponents.eps2},   {"delta", cfg.exponents.delta},
                    {"epsilon", cfg.epsilon},       {"q0", cfg.q0}};
  j["weights"] = cfg.weights;
  j["bmo"] = cfg.bmo;
  j["ensemble"] = {{"count", cfg.ensemble.count},
                   {"seed", cfg.ensemble.seed},
                   {"generator", cfg.ensemble.generator},
                   {"deg", resolved_deg(cfg)},
                   {"k", cfg.ensemble.bumps},
                   {"support", {cfg.ensemble.support[0], cfg.ensemble.support[1]}}};
  if (has_grid(cfg.theorem_id)) {
    const TQuad q = resolved_tquad(cfg);
    j["tquad"] = {{"t_min", q.t_min}, {"t_max", q.t_max}, {"nodes_per_octave", q.nodes_per_octave}};
  }
  j["windows"] = {{"family", window_mode_name(cfg.windows.mode)},
                  {"wrap", cfg.windows.wrap},
                  {"max_side", cfg.windows.max_side}};
  j["refinement"] = cfg.refinement;
  j["scaling"] = {{"a", cfg.scaling.a}, {"mesh", cfg.scaling.mesh}};
  return j;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace

const std::vector<std::string>& theorem_ids() {
  static const std::vector<std::string> ids{"T11i", "T11ii", "T12i", "T12ii", "T14",
                                            "T15",  "T16",   "L43",  "L44",   "L46",
                                            "L55",  "P31scale", "P32scale", "SQID"};
  return ids;
}

TrialConfig parse_trial_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  allow_fields(root, "config",
               {"theorem_id", "grid", "symbol", "exponents", "weights", "bmo", "ensemble", "tquad",
                "windows", "refinement", "scaling"});
  TrialConfig cfg;
  try {
    const auto& id = require(root, "theorem_id");
    if (!id.is_string()) throw ConfigError("theorem_id must be a string");
    cfg.theorem_id = id.get<std::string>();
    const auto& ids = theorem_ids();
    if (std::find(ids.begin(), ids.end(), cfg.theorem_id) == ids.end()) {
      throw ConfigError("unknown theorem_id '" + cfg.theorem_id + "'");
    }
    if (root.contains("grid")) {
      const auto& g = root["grid"];
      allow_fields(g, "grid", {"dim", "N", "L"});
      if (g.contains("dim")) cfg.dim = get_int(g["dim"], "grid.dim");
      if (g.contains("N")) cfg.n = get_int(g["N"], "grid.N");
      if (g.contains("L")) cfg.box_length = get_number(g["L"], "grid.L");
    }
    Grid(cfg.dim, cfg.n, cfg.box_length);  // validates
    if (root.contains("symbol")) {
      if (!root["symbol"].is_string()) throw ConfigError("symbol must be a string spec");
      cfg.symbol = root["symbol"].get<std::string>();
    }
    symbol_from_spec(cfg.symbol);
    if (root.contains("exponents")) {
      const auto& e = root["exponents"];
      allow_fields(e, "exponents", {"p0", "p_list", "s", "eps1", "eps2", "delta", "epsilon", "q0"});
      auto& x = cfg.exponents;
      if (e.contains("p0")) x.p0 = get_number(e["p0"], "exponents.p0");
      if (e.contains("p_list")) {
        if (!e["p_list"].is_array()) throw ConfigError("exponents.p_list must be a list");
        x.p_list.clear();
        for (const auto& v : e["p_list"]) x.p_list.push_back(get_number(v, "exponents.p_list"));
      }
      if (e.contains("s")) x.s = get_int(e["s"], "exponents.s");
      if (e.contains("eps1")) x.eps1 = get_number(e["eps1"], "exponents.eps1");
      if (e.contains("eps2")) x.eps2 = get_number(e["eps2"], "exponents.eps2");
      if (e.contains("delta")) x.delta = get_number(e["delta"], "exponents.delta");
      if (e.contains("epsilon")) cfg.epsilon = get_number(e["epsilon"], "exponents.epsilon");
      if (e.contains("q0")) cfg.q0 = get_number(e["q0"], "exponents.q0");
    }
    cfg.exponents.validate();
    if (root.contains("weights")) cfg.weights = get_string_list(root["weights"], "weights");
    if (root.contains("bmo")) cfg.bmo = get_string_list(root["bmo"], "bmo");
    if (root.contains("ensemble")) {
      const auto& e = root["ensemble"];
      allow_fields(e, "ensemble", {"count", "seed", "generator", "deg", "k", "support"});
      if (e.contains("count")) cfg.ensemble.count = get_int(e["count"], "ensemble.count");
      if (e.contains("seed")) {
        if (!e["seed"].is_number_unsigned() && !e["seed"].is_number_integer()) {
          throw ConfigError("ensemble.seed must be a nonnegative integer");
        }
        if (e["seed"].is_number_integer() && e["seed"].get<std::int64_t>() < 0) {
          throw ConfigError("ensemble.seed must be a nonnegative integer");
        }
        cfg.ensemble.seed = e["seed"].get<std::uint64_t>();
      }
      if (e.contains("generator")) {
        if (!e["generator"].is_string()) throw ConfigError("ensemble.generator must be a string");
        cfg.ensemble.generator = e["generator"].get<std::string>();
      }
      if (e.contains("deg")) cfg.ensemble.deg = get_int(e["deg"], "ensemble.deg");
      if (e.contains("k")) cfg.ensemble.bumps = get_int(e["k"], "ensemble.k");
      if (e.contains("support")) {
        const auto& s = e["support"];
        if (!s.is_array() || s.size() != 2) throw ConfigError("ensemble.support must be [a, b]");
        cfg.ensemble.support = {get_number(s[0], "ensemble.support"),
                                get_number(s[1], "ensemble.support")};
      }
    }
    const auto& ens = cfg.ensemble;
    if (ens.count < 0) throw ConfigError("ensemble.count must be nonnegative");
    if (ens.generator != "random_trig" && ens.generator != "random_bumps" && ens.generator != "zero") {
      throw ConfigError("unknown generator '" + ens.generator + "'");
    }
    if (ens.deg < 0) throw ConfigError("ensemble.deg must be nonnegative");
    if (ens.bumps < 1) throw ConfigError("ensemble.k must be positive");
    if (!(ens.support[0] >= 0.0 && ens.support[0] < ens.support[1] && ens.support[1] <= 1.0)) {
      throw ConfigError("ensemble.support must satisfy 0 <= a < b <= 1");
    }
    if (root.contains("tquad")) {
      const auto& t = root["tquad"];
      allow_fields(t, "tquad", {"t_min", "t_max", "nodes_per_octave"});
      TQuad q;
      q.t_min = get_number(require(t, "t_min"), "tquad.t_min");
      q.t_max = get_number(require(t, "t_max"), "tquad.t_max");
      if (t.contains("nodes_per_octave")) q.nodes_per_octave = get_int(t["nodes_per_octave"], "tquad.nodes_per_octave");
      q.validate();
      cfg.tquad = q;
    }
    if (root.contains("windows")) {
      const auto& w = root["windows"];
      allow_fields(w, "windows", {"family", "wrap", "max_side"});
      if (w.contains("family")) {
        if (!w["family"].is_string()) throw ConfigError("windows.family must be a string");
        cfg.windows.mode = window_mode_from_name(w["family"].get<std::string>());
      }
      if (w.contains("wrap")) {
        if (!w["wrap"].is_boolean()) throw ConfigError("windows.wrap must be a boolean");
        cfg.windows.wrap = w["wrap"].get<bool>();
      }
      if (w.contains("max_side")) cfg.windows.max_side = get_int(w["max_side"], "windows.max_side");
      if (cfg.windows.max_side < 0) throw ConfigError("windows.max_side must be nonnegative");
    }
    if (root.contains("refinement")) {
      if (!root["refinement"].is_boolean()) throw ConfigError("refinement must be a boolean");
      cfg.refinement = root["refinement"].get<bool>();
    }
    if (root.contains("scaling")) {
      const auto& s = root["scaling"];
      allow_fields(s, "scaling", {"a", "mesh"});
      if (s.contains("a")) cfg.scaling.a = get_number(s["a"], "scaling.a");
      if (s.contains("mesh")) cfg.scaling.mesh = get_int(s["mesh"], "scaling.mesh");
      if (!(cfg.scaling.a > 1.0) || !std::isfinite(cfg.scaling.a)) throw ConfigError("scaling.a must exceed 1");
      if (cfg.scaling.mesh < 2) throw ConfigError("scaling.mesh must be at least 2");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  // Per-slot lists must match the arity.
  const auto arity = static_cast<std::size_t>(symbol_arity(cfg));
  if (cfg.exponents.p_list.size() != arity) {
    throw ConfigError("exponents.p_list needs one entry per symbol argument");
  }
  for (const auto* list : {&cfg.weights, &cfg.bmo}) {
    if (list->size() != 1 && list->size() != arity) {
      throw ConfigError("weights and bmo take one spec or one per symbol argument");
    }
  }
  const Grid g(cfg.dim, cfg.n, cfg.box_length);
  for (const auto& w : cfg.weights) weight_from_spec(w, g);
  for (const auto& b : cfg.bmo) bmo_function_from_spec(b, g);
  return cfg;
}

std::string canonical_config_json(const TrialConfig& cfg) { return config_to_json(cfg).dump(); }

std::string config_hash(const TrialConfig& cfg) { return fnv1a_hex(canonical_config_json(cfg)); }

// --- hypothesis gating ----------------------------------------------------------------

namespace {

[[noreturn]] void reject(const TrialConfig& cfg, const std::string& what) {
  throw HypothesisError(cfg.theorem_id + " requires " + what);
}

std::string fmt(double v) { return format_double(v); }

// Power exponent of a weight spec (0 for unit and constant weights).
double power_exponent(const std::string& spec) {
  const auto f = parse_family_spec(spec);
  if (f.family != "power") return 0.0;
  return f.params.at("a");
}

// Products of A_{r_i} weights lie in the joint class, and |x|^a is in A_r
// exactly when -dim < a < dim (r - 1) (a <= 0 for r = 1).
void require_joint_class(const TrialConfig& cfg, double p0) {
  const auto& P = cfg.exponents.p_list;
  for (std::size_t i = 0; i < P.size(); ++i) {
    const double a = power_exponent(slot_spec(cfg.weights, i));
    const double r = P[i] / p0;
    const bool ok = a > -cfg.dim && (r == 1.0 ? a <= 0.0 : a < cfg.dim * (r - 1.0));
    if (!ok) {
      reject(cfg, "weights in A_{P/p0}: power exponent a=" + fmt(a) + " of w" + std::to_string(i + 1) +
                      " must lie in (-dim, dim(p_i/p0 - 1))");
    }
  }
}

void require_a1(const TrialConfig& cfg) {
  for (std::size_t i = 0; i < cfg.exponents.p_list.size(); ++i) {
    const double a = power_exponent(slot_spec(cfg.weights, i));
    if (!(a > -cfg.dim && a <= 0.0)) {
      reject(cfg, "A_1 weights: power exponent a=" + fmt(a) + " must lie in (-dim, 0]");
    }
  }
}

void require_bilinear(const TrialConfig& cfg) {
  if (symbol_arity(cfg) != 2) reject(cfg, "a bilinear symbol");
}

// Window s in [n+1, 2n] and 2n/s <= p0 <= 2.
void require_multiplier_window(const TrialConfig& cfg) {
  const int n = cfg.dim;
  const int s = cfg.exponents.s;
  const double p0 = cfg.exponents.p0;
  if (s < n + 1 || s > 2 * n) reject(cfg, "s in [n+1, 2n] (got s=" + std::to_string(s) + ")");
  if (!(p0 >= 2.0 * n / s && p0 <= 2.0)) {
    reject(cfg, "2n/s <= p0 <= 2 (got p0=" + fmt(p0) + ")");
  }
}

void require_all_above(const TrialConfig& cfg) {
  for (double pi : cfg.exponents.p_list) {
    if (!(pi > cfg.exponents.p0)) reject(cfg, "p1,p2>p0");
  }
}

void require_all_at_least(const TrialConfig& cfg) {
  for (double pi : cfg.exponents.p_list) {
    if (!(pi >= cfg.exponents.p0)) reject(cfg, "p_i>=p0 for every i");
  }
}

bool some_equal(const TrialConfig& cfg) {
  const auto& P = cfg.exponents.p_list;
  return std::any_of(P.begin(), P.end(), [&](double pi) { return pi == cfg.exponents.p0; });
}

double linearity(const TrialConfig& cfg) { return static_cast<double>(cfg.exponents.p_list.size()); }

}  // namespace

void validate_hypotheses(const TrialConfig& cfg) {
  const std::string& id = cfg.theorem_id;
  const double p0 = cfg.exponents.p0;
  const double m = linearity(cfg);
  if (id == "T11i" || id == "T12i") {
    require_bilinear(cfg);
    require_multiplier_window(cfg);
    require_all_above(cfg);
    require_joint_class(cfg, p0);
  } else if (id == "T11ii") {
    require_bilinear(cfg);
    require_multiplier_window(cfg);
    if (!(p0 > 2.0 * cfg.dim / cfg.exponents.s)) reject(cfg, "p0>2n/s");
    require_all_at_least(cfg);
    if (!some_equal(cfg)) reject(cfg, "p1=p0 or p2=p0");
    require_joint_class(cfg, p0);
  } else if (id == "T12ii") {
    require_bilinear(cfg);
    require_multiplier_window(cfg);
    require_a1(cfg);
  } else if (id == "T14") {
    require_all_at_least(cfg);
    require_joint_class(cfg, p0);
  } else if (id == "T15") {
    require_all_above(cfg);
    require_joint_class(cfg, p0);
  } else if (id == "T16" || id == "L55") {
    require_a1(cfg);
  } else if (id == "L43") {
    const double d = cfg.exponents.delta;
    if (!(d > 0.0 && d < std::min(1.0, p0 / m))) reject(cfg, "0<delta<min(1,p0/m)");
  } else if (id == "L44") {
    if (cfg.windows.wrap) reject(cfg, "windows that do not wrap around the torus");
  } else if (id == "L46") {
    const double d = cfg.exponents.delta;
    const double e = cfg.epsilon;
    if (!(d > 0.0 && d < e && e < std::min(1.0, p0 / m))) reject(cfg, "0<delta<epsilon<min(1,p0/m)");
    if (!(cfg.q0 > p0)) reject(cfg, "q0>p0");
  } else if (id == "P31scale" || id == "P32scale") {
    require_bilinear(cfg);
    if (cfg.dim != 1) reject(cfg, "dim 1");
    const double bound = 2.0 * cfg.dim / cfg.exponents.s;
    if (!(p0 > bound && p0 <= 2.0)) reject(cfg, "2n/s<p<=2 with p=p0 (got p0=" + fmt(p0) + ")");
  } else if (id == "SQID") {
    require_bilinear(cfg);
    if (cfg.dim != 1) reject(cfg, "dim 1");
    if (cfg.n > 32) reject(cfg, "N<=32 for the four-frequency sum");
  }
}

// --- ensembles ----------------------------------------------------------------------

std::mt19937_64 trial_rng(std::uint64_t seed, std::size_t index) {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return std::mt19937_64(splitmix(seed ^ splitmix(static_cast<std::uint64_t>(index))));
}

namespace {

// Smooth cutoff equal to 1 at the middle of (lo, hi) and vanishing outside.
double cutoff(double u, double lo, double hi) {
  const double s = (2.0 * u - lo - hi) / (hi - lo);
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

struct TrigTerm {
  int k0, k1;
  double a, b;
};

struct Bump {
  double amp;
  Point center;
  double width;
};

}  // namespace

std::vector<SampledField> generate_inputs(const TrialConfig& cfg, const Grid& g, std::size_t index,
                                          int arity) {
  auto rng = trial_rng(cfg.ensemble.seed, index);
  const double L = g.box_length();
  const double lo = cfg.ensemble.support[0] * L;
  const double hi = cfg.ensemble.support[1] * L;
  auto window = [&](const Point& x) {
    double w = cutoff(x[0], lo, hi);
    if (g.dim() == 2) w *= cutoff(x[1], lo, hi);
    return w;
  };
  std::vector<SampledField> out;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int slot = 0; slot < arity; ++slot) {
    std::vector<double> v(g.size(), 0.0);
    if (cfg.ensemble.generator == "random_trig") {
      const int deg = resolved_deg(cfg);
      std::vector<TrigTerm> terms;
      for (int k0 = 0; k0 <= deg; ++k0) {
        for (int k1 = 0; k1 <= (g.dim() == 2 ? deg : 0); ++k1) {
          const double a = normal(rng);
          const double b = normal(rng);
          terms.push_back({k0, k1, a, b});
        }
      }
      for (std::size_t i = 0; i < v.size(); ++i) {
        const Point x = g.point(i);
        const double w = window(x);
        if (w == 0.0) continue;
        double s = 0.0;
        for (const auto& t : terms) {
          const double ph = 2.0 * std::numbers::pi * (t.k0 * x[0] + t.k1 * x[1]) / L;
          s += t.a * std::cos(ph) + t.b * std::sin(ph);
        }
        v[i] = w * s;
      }
    } else if (cfg.ensemble.generator == "random_bumps") {
      const double span = hi - lo;
      std::vector<Bump> bumps;
      for (int k = 0; k < cfg.ensemble.bumps; ++k) {
        Bump b;
        b.amp = normal(rng);
        b.center[0] = lo + span * (0.25 + 0.5 * unit(rng));
        b.center[1] = lo + span * (0.25 + 0.5 * unit(rng));
        b.width = span * (1.0 / 32.0 + (1.0 / 8.0 - 1.0 / 32.0) * unit(rng));
        bumps.push_back(b);
      }
      for (std::size_t i = 0; i < v.size(); ++i) {
        const Point x = g.point(i);
        const double w = window(x);
        if (w == 0.0) continue;
        double s = 0.0;
        for (const auto& b : bumps) {
          double r2 = (x[0] - b.center[0]) * (x[0] - b.center[0]);
          if (g.dim() == 2) r2 += (x[1] - b.center[1]) * (x[1] - b.center[1]);
          s += b.amp * std::exp(-r2 / (2.0 * b.width * b.width));
        }
        v[i] = w * s;
      }
    }
    out.push_back(SampledField::from_real(g, std::move(v)));
  }
  return out;
}

namespace {

// 32 log-spaced levels between the 1st and 99.9th percentiles of the
// magnitudes (lower end raised to 1e-6 of the upper end when it vanishes).
std::vector<double> level_grid(std::vector<double> mags) {
  std::sort(mags.begin(), mags.end());
  const auto rank = [&](double q) {
    return mags[static_cast<std::size_t>(std::floor(q * static_cast<double>(mags.size() - 1)))];
  };
  const double top = rank(0.999);
  if (!(top > 0.0)) return {};
  const double bottom = std::max(rank(0.01), 1e-6 * top);
  std::vector<double> out(kLevels);
  for (int k = 0; k < kLevels; ++k) {
    out[static_cast<std::size_t>(k)] = bottom * std::pow(top / bottom, static_cast<double>(k) / (kLevels - 1));
  }
  return out;
}

void set_ratio(TrialRecord& r) {
  if (r.rhs > 0.0) {
    r.ratio = r.lhs / r.rhs;
  } else {
    r.degenerate = true;
    r.ratio = r.lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
}

struct TrialContext {
  const TrialConfig& cfg;
  Grid grid;
  Symbol symbol;
  TQuad tquad;
  std::vector<SampledField> f;
  std::vector<SampledField> w;
  std::vector<double> nu;  // composite weight samples
};

TrialContext make_context(const TrialConfig& cfg, std::size_t index, int n) {
  Grid g(cfg.dim, n, cfg.box_length);
  Symbol m = symbol_from_spec(cfg.symbol);
  TrialContext ctx{cfg, g, m, resolved_tquad(cfg), {}, {}, {}};
  ctx.f = generate_inputs(cfg, g, index, m.arity());
  for (int i = 0; i < m.arity(); ++i) ctx.w.push_back(weight_from_spec(slot_spec(cfg.weights, static_cast<std::size_t>(i)), g));
  ctx.nu = nu_weight(ctx.w, cfg.exponents.p_list).real_parts();
  return ctx;
}

std::vector<SampledField> bmo_functions(const TrialContext& ctx) {
  std::vector<SampledField> b;
  for (std::size_t i = 0; i < ctx.f.size(); ++i) b.push_back(bmo_function_from_spec(slot_spec(ctx.cfg.bmo, i), ctx.grid));
  return b;
}

double bmo_max(const std::vector<SampledField>& b, const WindowFamily& W) {
  double out = 0.0;
  for (const auto& bi : b) out = std::max(out, bmo_norm(bi, W));
  return out;
}

double weighted_product(const TrialContext& ctx) {
  double rhs = 1.0;
  for (std::size_t i = 0; i < ctx.f.size(); ++i) {
    const auto wv = ctx.w[i].real_parts();
    rhs *= lp_norm(ctx.f[i].magnitudes(), ctx.grid, ctx.cfg.exponents.p_list[i], &wv);
  }
  return rhs;
}

// max over levels of lambda nu({|F| > lambda})^(1/p).
double weak_over_levels(const std::vector<double>& mags, const TrialContext& ctx, double p) {
  double best = 0.0;
  for (double lam : level_grid(mags)) {
    best = std::max(best, lam * std::pow(level_measure(mags, ctx.grid, lam, &ctx.nu), 1.0 / p));
  }
  return best;
}

// max over levels lambda = t^m of nu({|F| > t^m}) / prod_j (int Phi(|f_j| / t) w_j)^(1/m).
void endpoint_over_levels(const std::vector<double>& mags, const TrialContext& ctx, TrialRecord& r) {
  const double m = static_cast<double>(ctx.f.size());
  const double p0 = ctx.cfg.exponents.p0;
  std::vector<std::vector<double>> fm, wv;
  for (std::size_t j = 0; j < ctx.f.size(); ++j) {
    fm.push_back(ctx.f[j].magnitudes());
    wv.push_back(ctx.w[j].real_parts());
  }
  const double dv = ctx.grid.cell_volume();
  r.lhs = 0.0;
  r.rhs = 0.0;
  r.ratio = 0.0;
  bool found = false;
  for (double lam : level_grid(mags)) {
    const double t = std::pow(lam, 1.0 / m);
    const double lhs = level_measure(mags, ctx.grid, lam, &ctx.nu);
    double rhs = 1.0;
    for (std::size_t j = 0; j < fm.size(); ++j) {
      double s = 0.0;
      for (std::size_t x = 0; x < fm[j].size(); ++x) {
        if (fm[j][x] != 0.0) s += phi(fm[j][x] / t, p0) * wv[j][x];
      }
      rhs *= std::pow(s * dv, 1.0 / m);
    }
    TrialRecord probe;
    probe.lhs = lhs;
    probe.rhs = rhs;
    set_ratio(probe);
    if (!found || probe.ratio > r.ratio) {
      r.lhs = lhs;
      r.rhs = rhs;
      r.ratio = probe.ratio;
      r.degenerate = probe.degenerate;
      found = true;
    }
  }
  if (!found) set_ratio(r);
}

// sup over admissible points of lhs / rhs; points where both vanish are skipped.
void pointwise_sup(const std::vector<double>& lhs, const std::vector<double>& rhs,
                   const std::vector<bool>& admissible, TrialRecord& r) {
  bool any = false;
  r.lhs = 0.0;
  r.rhs = 0.0;
  r.ratio = 0.0;
  for (std::size_t x = 0; x < lhs.size(); ++x) {
    if (!admissible[x]) continue;
    any = true;
    if (lhs[x] == 0.0 && rhs[x] == 0.0) continue;
    const double ratio = rhs[x] > 0.0 ? lhs[x] / rhs[x] : std::numeric_limits<double>::infinity();
    if (ratio > r.ratio) {
      r.ratio = ratio;
      r.lhs = lhs[x];
      r.rhs = rhs[x];
    }
  }
  if (!any) {
    r.degenerate = true;
    r.notes.push_back("empty admissible region");
  } else if (r.ratio == 0.0) {
    r.degenerate = std::all_of(rhs.begin(), rhs.end(), [](double v) { return v == 0.0; });
  }
}

// Points at torus distance more than 3R from the support center, R the
// radius of the ball around the support box.
std::vector<bool> far_region(const TrialContext& ctx) {
  const auto& s = ctx.cfg.ensemble.support;
  const double L = ctx.grid.box_length();
  const double center = 0.5 * (s[0] + s[1]) * L;
  const double R = 0.5 * (s[1] - s[0]) * L * (ctx.grid.dim() == 2 ? std::sqrt(2.0) : 1.0);
  std::vector<bool> out(ctx.grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Point x = ctx.grid.point(i);
    double d2 = 0.0;
    for (int a = 0; a < ctx.grid.dim(); ++a) {
      double d = std::abs(x[static_cast<std::size_t>(a)] - center);
      d = std::min(d, L - d);
      d2 += d * d;
    }
    out[i] = std::sqrt(d2) > 3.0 * R;
  }
  return out;
}

void run_norm_trial(const TrialContext& ctx, TrialRecord& r, bool commutator, bool weak) {
  const auto& cfg = ctx.cfg;
  const double p = cfg.exponents.p();
  std::vector<double> out;
  double bnorm = 1.0;
  if (commutator) {
    const auto b = bmo_functions(ctx);
    bnorm = bmo_max(b, cfg.windows);
    out = commutator_multiplier(ctx.symbol, b, ctx.f, ctx.tquad).magnitudes();
  } else {
    out = square_multiplier(ctx.symbol, ctx.f, ctx.tquad).magnitudes();
  }
  r.lhs = weak ? weak_over_levels(out, ctx, p) : lp_norm(out, ctx.grid, p, &ctx.nu);
  r.rhs = bnorm * weighted_product(ctx);
  set_ratio(r);
}

void run_endpoint_trial(const TrialContext& ctx, TrialRecord& r) {
  const auto b = bmo_functions(ctx);
  const auto out = commutator_multiplier(ctx.symbol, b, ctx.f, ctx.tquad).magnitudes();
  endpoint_over_levels(out, ctx, r);
}

void run_orlicz_maximal_trial(const TrialContext& ctx, TrialRecord& r) {
  TrialRecord best;
  bool first = true;
  for (std::size_t i = 0; i < ctx.f.size(); ++i) {
    const auto out =
        orlicz_maximal_slot(ctx.f, i, ctx.cfg.exponents.p0, ctx.cfg.windows).magnitudes();
    TrialRecord probe;
    endpoint_over_levels(out, ctx, probe);
    if (first || probe.ratio > best.ratio) {
      best = probe;
      first = false;
    }
  }
  r.lhs = best.lhs;
  r.rhs = best.rhs;
  r.ratio = best.ratio;
  r.degenerate = best.degenerate;
}

void run_domination_trial(const TrialContext& ctx, TrialRecord& r) {
  const auto& cfg = ctx.cfg;
  const auto& W = cfg.windows;
  const double p0 = cfg.exponents.p0;
  const auto Tf = square_multiplier(ctx.symbol, ctx.f, ctx.tquad);
  std::vector<double> lhs, rhs;
  std::vector<bool> admissible(ctx.grid.size(), true);
  if (cfg.theorem_id == "L43") {
    lhs = sharp_maximal_delta(Tf, cfg.exponents.delta, W).magnitudes();
    rhs = multilinear_maximal_p(ctx.f, p0, W).magnitudes();
  } else if (cfg.theorem_id == "L44") {
    lhs = Tf.magnitudes();
    rhs = multilinear_maximal_p(ctx.f, p0, W).magnitudes();
    admissible = far_region(ctx);
  } else {
    const auto b = bmo_functions(ctx);
    const double bnorm = bmo_max(b, W);
    if (bnorm == 0.0) {
      // Constant b: the commutator vanishes identically and the FFT route
      // would only return rounding residue against a zero right-hand side.
      r.lhs = r.rhs = r.ratio = 0.0;
      r.degenerate = true;
      r.notes.push_back("b has zero BMO norm");
      return;
    }
    const auto Tb = commutator_multiplier(ctx.symbol, b, ctx.f, ctx.tquad);
    lhs = sharp_maximal_delta(Tb, cfg.exponents.delta, W).magnitudes();
    const auto mq = multilinear_maximal_p(ctx.f, cfg.q0, W).magnitudes();
    const auto me = m_delta(Tf, cfg.epsilon, W).magnitudes();
    rhs.resize(mq.size());
    for (std::size_t x = 0; x < rhs.size(); ++x) rhs[x] = bnorm * (mq[x] + me[x]);
  }
  pointwise_sup(lhs, rhs, admissible, r);
}

void run_scaling_trial(const TrialConfig& cfg, std::size_t index, TrialRecord& r) {
  auto rng = trial_rng(cfg.ensemble.seed, index);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Symbol m = symbol_from_spec(cfg.symbol);
  const double R = std::pow(2.0, -2.0 + 2.0 * unit(rng));
  const double c = unit(rng) - 0.5;
  const double x = c + 0.5 * R * (2.0 * unit(rng) - 1.0);
  double xbar = c + 0.5 * R * (2.0 * unit(rng) - 1.0);
  int j = static_cast<int>(3.0 * unit(rng));
  int k = static_cast<int>(3.0 * unit(rng));
  if (j == 0 && k == 0) j = 1;
  if (xbar == x) xbar = c;
  const double a = cfg.scaling.a;
  const double p = cfg.exponents.p0;
  AnnulusOptions opts;
  opts.mesh = cfg.scaling.mesh;
  const Cube Q{c, R};
  const Cube Qa{a * c, a * R};
  double base = 0.0, dilated = 0.0;
  if (cfg.theorem_id == "P31scale") {
    base = estimate_Ajk(m, Q, x, xbar, j, k, p, opts);
    dilated = estimate_Ajk(m, Qa, a * x, a * xbar, j, k, p, opts);
  } else {
    base = estimate_Bjk(m, Q, j, k, p, opts);
    dilated = estimate_Bjk(m, Qa, j, k, p, opts);
  }
  const double expected = -2.0 * cfg.dim / p;
  r.lhs = base;
  r.rhs = dilated;
  r.notes.push_back("j=" + std::to_string(j) + " k=" + std::to_string(k));
  if (!(base > 0.0) || !(dilated > 0.0)) {
    r.degenerate = true;
    r.ratio = base == dilated ? 0.0 : std::numeric_limits<double>::infinity();
    return;
  }
  const double observed = std::log(dilated / base) / std::log(a);
  r.notes.push_back("observed exponent " + format_double(observed));
  r.ratio = std::abs(observed - expected) / std::abs(expected);
}

}  // namespace

TrialRecord run_trial(const TrialConfig& cfg, std::size_t index, int n_override) {
  const int n = n_override > 0 ? n_override : cfg.n;
  TrialConfig at_n = cfg;
  if (n != cfg.n) {
    at_n.n = n;
    if (!at_n.tquad) at_n.tquad = resolved_tquad(cfg);
    if (at_n.ensemble.deg == 0) at_n.ensemble.deg = resolved_deg(cfg);
  }
  TrialRecord r;
  r.index = index;
  r.n = n;
  r.config_hash = config_hash(at_n);
  const std::string& id = cfg.theorem_id;
  if (id == "P31scale" || id == "P32scale") {
    run_scaling_trial(at_n, index, r);
    return r;
  }
  const TrialContext ctx = make_context(at_n, index, n);
  if (id == "SQID") {
    r.ratio = square_identity_check(ctx.symbol, ctx.f[0], ctx.f[1], ctx.tquad);
    r.lhs = r.ratio;
    r.rhs = 1.0;
    return r;
  }
  if (id == "T11i" || id == "T14") {
    run_norm_trial(ctx, r, false, id == "T14" && some_equal(cfg));
  } else if (id == "T11ii") {
    run_norm_trial(ctx, r, false, true);
  } else if (id == "T12i" || id == "T15") {
    run_norm_trial(ctx, r, true, false);
  } else if (id == "T12ii" || id == "T16") {
    run_endpoint_trial(ctx, r);
  } else if (id == "L55") {
    run_orlicz_maximal_trial(ctx, r);
  } else {
    run_domination_trial(ctx, r);
  }
  return r;
}

ReportSummary summarize(const std::vector<TrialRecord>& records,
                        const std::vector<TrialRecord>& refinement_records) {
  ReportSummary s;
  s.count = records.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto max_of = [&](const std::vector<TrialRecord>& rs) {
    if (rs.empty()) return nan;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& r : rs) {
      if (std::isnan(r.ratio)) return nan;
      best = std::max(best, r.ratio);
    }
    return best;
  };
  s.max_ratio = max_of(records);
  std::vector<double> ratios;
  for (const auto& r : records) {
    ratios.push_back(r.ratio);
    if (r.degenerate) ++s.degenerate_count;
  }
  if (ratios.empty() || std::isnan(s.max_ratio)) {
    s.median_ratio = nan;
  } else {
    std::sort(ratios.begin(), ratios.end());
    const std::size_t h = ratios.size() / 2;
    s.median_ratio = ratios.size() % 2 == 1 ? ratios[h] : 0.5 * (ratios[h - 1] + ratios[h]);
  }
  if (!refinement_records.empty()) s.refinement_drift = max_of(refinement_records) / s.max_ratio;
  s.nan_flag = std::isnan(s.max_ratio) || (s.refinement_drift && std::isnan(*s.refinement_drift));
  return s;
}

namespace {

std::vector<TrialRecord> run_ensemble(const TrialConfig& cfg, int n) {
  const auto count = static_cast<std::size_t>(cfg.ensemble.count);
  std::vector<TrialRecord> out(count);
  parallel_for(count, [&](std::size_t i) {
    try {
      out[i] = run_trial(cfg, i, n);
    } catch (const std::exception& e) {
      TrialRecord r;
      r.index = i;
      r.n = n;
      r.ratio = std::numeric_limits<double>::quiet_NaN();
      r.lhs = r.ratio;
      r.rhs = r.ratio;
      r.degenerate = true;
      r.notes.push_back(std::string("error: ") + e.what());
      out[i] = r;
    }
  });
  return out;
}

std::vector<std::string> report_notes(const TrialConfig& cfg) {
  std::vector<std::string> notes{"multiplier operator exercised at m in {1,2} only"};
  const auto& id = cfg.theorem_id;
  if (id == "T11ii" || id == "T12ii" || id == "T16" || id == "L55" ||
      (id == "T14" && some_equal(cfg))) {
    notes.push_back("weak-type and endpoint left sides are maxima over 32 log-spaced levels between the 1st and 99.9th percentiles of the output (a lower bound on the supremum)");
  }
  if (id == "T12i" || id == "T12ii" || id == "T15" || id == "T16" || id == "L46") {
    notes.push_back("commutators evaluated through the multiplier route");
  }
  if (id == "L44") notes.push_back("ratio restricted to torus distance above 3R from the support center");
  if (id == "P31scale" || id == "P32scale") {
    notes.push_back("ratio is |observed dilation exponent + 2 dim / p| / (2 dim / p) with p = p0");
  }
  if (id == "SQID") notes.push_back("ratio is the largest relative pointwise discrepancy of the four-frequency form");
  if (id == "T12i" || id == "T15") {
    try {
      const Grid g(cfg.dim, cfg.n, cfg.box_length);
      std::vector<SampledField> w;
      for (std::size_t i = 0; i < cfg.exponents.p_list.size(); ++i) w.push_back(weight_from_spec(slot_spec(cfg.weights, i), g));
      const auto scan = openness_scan(w, cfg.exponents.p_list, cfg.exponents.p0, cfg.windows, 8);
      notes.push_back("openness scan: largest q with finite joint characteristic " + format_double(scan.q_max));
    } catch (const Error& e) {
      notes.push_back(std::string("openness scan skipped: ") + e.what());
    }
  }
  return notes;
}

}  // namespace

Report ensemble_report(const TrialConfig& cfg) {
  validate_hypotheses(cfg);
  Report rep;
  rep.config = cfg;
  rep.notes = report_notes(cfg);
  rep.records = run_ensemble(cfg, cfg.n);
  const bool refine = cfg.refinement && has_grid(cfg.theorem_id) && cfg.theorem_id != "SQID";
  if (refine && cfg.ensemble.count > 0) rep.refinement_records = run_ensemble(cfg, 2 * cfg.n);
  rep.summary = summarize(rep.records, rep.refinement_records);
  return rep;
}

Report domination_field_check(const std::string& kind, const TrialConfig& cfg) {
  if (kind != "L43" && kind != "L44" && kind != "L46") {
    throw ConfigError("domination check kind must be L43, L44 or L46");
  }
  TrialConfig c = cfg;
  c.theorem_id = kind;
  return ensemble_report(c);
}

// --- output -----------------------------------------------------------------------------

namespace {

json record_json(const TrialRecord& r) {
  return json{{"index", r.index},   {"N", r.n},
              {"lhs", number(r.lhs)}, {"rhs", number(r.rhs)},
              {"ratio", number(r.ratio)}, {"degenerate", r.degenerate},
              {"config_hash", r.config_hash}, {"notes", r.notes}};
}

TrialRecord record_from_json(const json& j) {
  TrialRecord r;
  r.index = j.at("index").get<std::size_t>();
  r.n = j.at("N").get<int>();
  r.lhs = read_number(j.at("lhs"));
  r.rhs = read_number(j.at("rhs"));
  r.ratio = read_number(j.at("ratio"));
  r.degenerate = j.at("degenerate").get<bool>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.notes = j.at("notes").get<std::vector<std::string>>();
  return r;
}

}  // namespace

std::string report_json(const Report& r) {
  json j;
  j["schema"] = kSchema;
  j["theorem_id"] = r.config.theorem_id;
  j["config"] = config_to_json(r.config);
  j["config_hash"] = config_hash(r.config);
  j["notes"] = r.notes;
  j["environment"] = {{"library", "mslab"}, {"version", kVersion}, {"fft", std::string(fftw_version)}};
  json recs = json::array();
  for (const auto& rec : r.records) recs.push_back(record_json(rec));
  j["records"] = recs;
  json refs = json::array();
  for (const auto& rec : r.refinement_records) refs.push_back(record_json(rec));
  j["refinement_records"] = refs;
  json s;
  s["count"] = r.summary.count;
  s["max_ratio"] = number(r.summary.max_ratio);
  s["median_ratio"] = number(r.summary.median_ratio);
  s["refinement_drift"] = r.summary.refinement_drift ? number(*r.summary.refinement_drift) : json(nullptr);
  s["nan_flag"] = r.summary.nan_flag;
  s["degenerate_count"] = r.summary.degenerate_count;
  j["summary"] = s;
  return j.dump(2) + "\n";
}

std::string report_csv(const Report& r) {
  std::ostringstream out;
  out << "index,N,lhs,rhs,ratio,degenerate,config_hash\n";
  for (const auto* list : {&r.records, &r.refinement_records}) {
    for (const auto& rec : *list) {
      out << rec.index << ',' << rec.n << ',' << format_double(rec.lhs) << ','
          << format_double(rec.rhs) << ',' << format_double(rec.ratio) << ','
          << (rec.degenerate ? 1 : 0) << ',' << rec.config_hash << '\n';
    }
  }
  return out.str();
}

std::string ratios_dat(const Report& r) {
  std::ostringstream out;
  out << "# index ratio (N=" << r.config.n << ")\n";
  for (const auto& rec : r.records) out << rec.index << ' ' << format_double(rec.ratio) << '\n';
  return out.str();
}

void write_report_files(const Report& r, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  const std::pair<const char*, std::string> files[] = {
      {"report.json", report_json(r)}, {"report.csv", report_csv(r)}, {"ratios.dat", ratios_dat(r)}};
  for (const auto& [name, text] : files) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw IoError("cannot write " + path.string());
  }
}

ReportSummary summary_from_report_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
    if (j.at("schema").get<std::string>() != kSchema) throw ConfigError("unsupported report schema");
    std::vector<TrialRecord> recs, refs;
    for (const auto& x : j.at("records")) recs.push_back(record_from_json(x));
    for (const auto& x : j.at("refinement_records")) refs.push_back(record_from_json(x));
    return summarize(recs, refs);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
}

}  // namespace mslab
