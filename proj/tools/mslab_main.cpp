// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Links only the C interface.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mslab/mslab.h"

namespace {

using json = nlohmann::json;

// Exit codes: 0 success, 2 configuration error, 3 hypothesis rejection,
// 1 anything else.
class Failure : public std::runtime_error {
 public:
  Failure(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

int exit_code(mslab_status s) {
  switch (s) {
    case MSLAB_OK:
      return 0;
    case MSLAB_ERR_HYPOTHESIS:
      return 3;
    case MSLAB_ERR_CONFIG:
    case MSLAB_ERR_PARSE:
    case MSLAB_ERR_IO:
    case MSLAB_ERR_INVALID_ARGUMENT:
      return 2;
    default:
      return 1;
  }
}

void check(mslab_status s) {
  if (s != MSLAB_OK) throw Failure(exit_code(s), mslab_last_error());
}

struct FieldDeleter {
  void operator()(mslab_field_t* f) const { mslab_field_free(f); }
};
struct GridDeleter {
  void operator()(mslab_grid_t* g) const { mslab_grid_free(g); }
};
struct SymbolDeleter {
  void operator()(mslab_symbol_t* m) const { mslab_symbol_free(m); }
};
struct StringDeleter {
  void operator()(char* s) const { mslab_string_free(s); }
};
using Field = std::unique_ptr<mslab_field_t, FieldDeleter>;
using GridPtr = std::unique_ptr<mslab_grid_t, GridDeleter>;
using SymbolPtr = std::unique_ptr<mslab_symbol_t, SymbolDeleter>;
using CString = std::unique_ptr<char, StringDeleter>;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure(2, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string hash_of(const std::string& text) {
  char out[17];
  check(mslab_hash_text(text.c_str(), out));
  return out;
}

Field load_field(const std::string& path) {
  mslab_field_t* f = nullptr;
  check(mslab_field_read(path.c_str(), &f));
  return Field(f);
}

std::vector<Field> load_fields(const std::vector<std::string>& paths) {
  std::vector<Field> out;
  for (const auto& p : paths) out.push_back(load_field(p));
  return out;
}

std::vector<const mslab_field_t*> raw(const std::vector<Field>& fields) {
  std::vector<const mslab_field_t*> out;
  for (const auto& f : fields) out.push_back(f.get());
  return out;
}

SymbolPtr load_symbol(const std::string& spec) {
  mslab_symbol_t* m = nullptr;
  check(mslab_symbol_parse(spec.c_str(), 0, &m));
  return SymbolPtr(m);
}

GridPtr grid_of(const mslab_field_t* f) {
  mslab_grid_t* g = nullptr;
  check(mslab_field_grid(f, &g));
  return GridPtr(g);
}

GridPtr make_grid(int dim, int n, double L) {
  mslab_grid_t* g = nullptr;
  check(mslab_grid_create(dim, n, L, &g));
  return GridPtr(g);
}

json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

// Hash of the command parameters and the bytes of every input file.
std::string command_hash(json params, const std::vector<std::string>& inputs) {
  json digests = json::array();
  for (const auto& p : inputs) digests.push_back(hash_of(read_text(p)));
  params["inputs"] = digests;
  return hash_of(params.dump());
}

json field_summary(const mslab_field_t* f, const std::string& hash) {
  double l2 = 0.0;
  check(mslab_lp_norm(f, 2.0, nullptr, &l2));
  size_t n = 0;
  check(mslab_field_size(f, &n));
  std::vector<double> re(n), im(n);
  check(mslab_field_values(f, re.data(), im.data()));
  double linf = 0.0;
  for (size_t i = 0; i < n; ++i) linf = std::max(linf, std::hypot(re[i], im[i]));
  return json{{"l2", number(l2)}, {"linf", number(linf)}, {"config_hash", hash}};
}

void finish_field(const mslab_field_t* f, const std::string& out_path, const std::string& hash) {
  if (!out_path.empty()) check(mslab_field_write(f, out_path.c_str()));
  std::cout << field_summary(f, hash).dump(2) << '\n';
}

mslab_window_mode window_mode(const std::string& name) {
  if (name == "dyadic") return MSLAB_WINDOWS_DYADIC;
  if (name == "all") return MSLAB_WINDOWS_ALL;
  throw Failure(2, "unknown window family '" + name + "' (expected dyadic or all)");
}

struct TQuadOpts {
  double t_min = 0.0;
  double t_max = 0.0;
  int npo = 8;

  void add(CLI::App* app) {
    app->add_option("--t-min", t_min, "smallest t node range end (default dx/4)");
    app->add_option("--t-max", t_max, "largest t node range end (default 4L)");
    app->add_option("--nodes-per-octave", npo, "t nodes per octave");
  }
  bool given() const { return t_min > 0.0 || t_max > 0.0; }
  mslab_tquad resolve(const mslab_field_t* f) const {
    mslab_tquad q{};
    auto g = grid_of(f);
    check(mslab_default_tquad(g.get(), &q));
    if (t_min > 0.0) q.t_min = t_min;
    if (t_max > 0.0) q.t_max = t_max;
    q.nodes_per_octave = npo;
    return q;
  }
  json to_json(const mslab_tquad& q) const {
    return json{{"t_min", q.t_min}, {"t_max", q.t_max}, {"nodes_per_octave", q.nodes_per_octave}};
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mslab: bilinear square functions, maximal functions and weights on periodic grids"};
  app.require_subcommand(1);

  // sq-mult / sq-kernel
  std::string symbol = "gauss_bump";
  std::vector<std::string> inputs;
  std::string out_path;
  TQuadOpts tq;
  auto* sq_mult = app.add_subcommand("sq-mult", "square function through the multiplier route");
  auto* sq_kernel = app.add_subcommand("sq-kernel", "square function through kernel sums");
  for (auto* sc : {sq_mult, sq_kernel}) {
    sc->add_option("--symbol", symbol, "symbol spec");
    sc->add_option("--input", inputs, "input field files, one per symbol argument")->required();
    sc->add_option("--out", out_path, "output field file");
    tq.add(sc);
  }

  // commutator
  std::vector<std::string> b_inputs;
  std::string bmo_spec;
  std::string route = "multiplier";
  auto* comm = app.add_subcommand("commutator", "commutator square function");
  comm->add_option("--symbol", symbol, "symbol spec");
  comm->add_option("--input", inputs, "input field files")->required();
  comm->add_option("--b", b_inputs, "BMO function field files, one per slot");
  comm->add_option("--bmo", bmo_spec, "BMO function spec shared by all slots (zero, constant:c=, log, cos:k=)");
  comm->add_option("--route", route, "multiplier or kernel")->check(CLI::IsMember({"multiplier", "kernel"}));
  comm->add_option("--out", out_path, "output field file");
  tq.add(comm);

  // ajk / bjk
  double center = 0.0, half_side = 1.0, x = 0.0, xbar = 0.25, p = 2.0;
  int j = 1, k = 1, mesh = 64;
  auto* ajk = app.add_subcommand("ajk", "annulus difference quantity A_jk");
  auto* bjk = app.add_subcommand("bjk", "annulus size quantity B_jk");
  for (auto* sc : {ajk, bjk}) {
    sc->add_option("--symbol", symbol, "bilinear symbol spec");
    sc->add_option("--center", center, "window center");
    sc->add_option("--half-side", half_side, "window half side");
    sc->add_option("--j", j, "annulus index of y2");
    sc->add_option("--k", k, "annulus index of y1");
    sc->add_option("--p", p, "exponent in (1, 2]");
    sc->add_option("--mesh", mesh, "midpoint cells per annulus");
  }
  ajk->add_option("--x", x, "first point in the half window");
  ajk->add_option("--xbar", xbar, "second point in the half window");

  // maximal
  std::string op = "hl";
  std::string windows = "dyadic";
  double p0 = 1.0, delta = 0.5;
  size_t slot = 0;
  auto* maximal = app.add_subcommand("maximal", "maximal functions over lattice windows");
  maximal->add_option("--op", op, "hl, mp, mdelta, sharp or orlicz")
      ->check(CLI::IsMember({"hl", "mp", "mdelta", "sharp", "orlicz"}));
  maximal->add_option("--windows", windows, "dyadic or all");
  maximal->add_option("--input", inputs, "input field files")->required();
  maximal->add_option("--p0", p0, "exponent for mp and orlicz");
  maximal->add_option("--delta", delta, "exponent for mdelta and sharp");
  maximal->add_option("--slot", slot, "Orlicz slot for orlicz");
  maximal->add_option("--out", out_path, "output field file");

  // weights
  std::string wfamily = "power:a=-0.5";
  double ap = 2.0;
  int dim = 1, n = 256;
  double L = 1.0;
  auto* weights = app.add_subcommand("weights", "A_p characteristic of a weight");
  weights->add_option("--family", wfamily, "unit, constant:c=, power:a=[,x0=,x1=]");
  weights->add_option("--ap", ap, "p of the A_p class (1 selects A_1)");
  weights->add_option("--dim", dim, "grid dimension");
  weights->add_option("--N", n, "points per axis");
  weights->add_option("--L", L, "box length");
  weights->add_option("--windows", windows, "dyadic or all");

  // orlicz
  std::string kind = "phi";
  double alpha = 1.0;
  std::vector<double> ts;
  std::string input_one;
  auto* oeval = app.add_subcommand("orlicz-eval", "evaluate a Young function");
  oeval->add_option("--kind", kind, "phi, phi0, phi1 or phibar1");
  oeval->add_option("--alpha", alpha, "exponent alpha");
  oeval->add_option("--t", ts, "arguments")->required();
  auto* onorm = app.add_subcommand("orlicz-norm", "Luxemburg norm of samples");
  onorm->add_option("--kind", kind, "phi, phi0, phi1 or phibar1");
  onorm->add_option("--alpha", alpha, "exponent alpha");
  onorm->add_option("--values", ts, "sample values");
  onorm->add_option("--input", input_one, "field file whose magnitudes are the samples");

  // check-symbol
  std::string sym_family, cond = "eq13";
  int s = 2;
  double eps1 = 1.0, eps2 = 1.0, cp0 = 1.5;
  auto* chk = app.add_subcommand("check-symbol", "numerical check of a symbol or kernel condition");
  auto* fam_opt = chk->add_option("--family", sym_family, "built-in family (gauss_bump, rational_bump:k=4, ...)");
  auto* sym_opt = chk->add_option("--symbol", symbol, "symbol spec (expr:...)");
  fam_opt->excludes(sym_opt);
  chk->add_option("--cond", cond, "eq13, eq21, eq152, eq153, H2, H3 or XY-smooth");
  chk->add_option("--s", s, "derivative order s");
  chk->add_option("--dim", dim, "dimension n");
  chk->add_option("--eps1", eps1, "decay exponent eps1");
  chk->add_option("--eps2", eps2, "decay exponent eps2");
  chk->add_option("--p0", cp0, "p0 for kernel conditions");

  // verify / report
  std::string theorem, config_path, out_dir = ".";
  auto* verify = app.add_subcommand("verify", "run a verification ensemble and write reports");
  verify->add_option("--theorem", theorem, "target id (T11i, T15, L43, ...)")->required();
  verify->add_option("--config", config_path, "config JSON (default: built-in config)");
  verify->add_option("--out", out_dir, "output directory for report.json, report.csv, ratios.dat");
  std::string report_path;
  auto* report = app.add_subcommand("report", "summary recomputed from a report.json");
  report->add_option("--input", report_path, "report.json path")->required();

  // field (helper to produce inputs)
  std::string field_kind = "weight", field_spec = "unit";
  auto* field = app.add_subcommand("field", "write a weight or BMO function field file");
  field->add_option("--kind", field_kind, "weight or bmo")->check(CLI::IsMember({"weight", "bmo"}));
  field->add_option("--spec", field_spec, "family spec");
  field->add_option("--dim", dim, "grid dimension");
  field->add_option("--N", n, "points per axis");
  field->add_option("--L", L, "box length");
  field->add_option("--out", out_path, "output field file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sq_mult->parsed() || sq_kernel->parsed()) {
      const bool kernel = sq_kernel->parsed();
      auto m = load_symbol(symbol);
      auto f = load_fields(inputs);
      const auto q = tq.resolve(f.front().get());
      mslab_field_t* out = nullptr;
      auto ptrs = raw(f);
      check(kernel ? mslab_square_kernel(m.get(), ptrs.data(), ptrs.size(), &q, &out)
                   : mslab_square_multiplier(m.get(), ptrs.data(), ptrs.size(), &q, &out));
      Field result(out);
      json params{{"command", kernel ? "sq-kernel" : "sq-mult"}, {"symbol", symbol}, {"tquad", tq.to_json(q)}};
      finish_field(result.get(), out_path, command_hash(params, inputs));
    } else if (comm->parsed()) {
      auto m = load_symbol(symbol);
      auto f = load_fields(inputs);
      std::vector<Field> b;
      if (!b_inputs.empty()) {
        b = load_fields(b_inputs);
      } else {
        if (bmo_spec.empty()) throw Failure(2, "commutator needs --b files or a --bmo spec");
        auto g = grid_of(f.front().get());
        for (size_t i = 0; i < f.size(); ++i) {
          mslab_field_t* bf = nullptr;
          check(mslab_bmo_function_from_spec(g.get(), bmo_spec.c_str(), &bf));
          b.emplace_back(bf);
        }
      }
      if (b.size() != f.size()) throw Failure(2, "need one BMO function per input field");
      const auto q = tq.resolve(f.front().get());
      mslab_field_t* out = nullptr;
      auto fp = raw(f);
      auto bp = raw(b);
      check(mslab_commutator(m.get(), bp.data(), fp.data(), fp.size(), &q, route == "kernel", &out));
      Field result(out);
      json params{{"command", "commutator"}, {"symbol", symbol}, {"tquad", tq.to_json(q)},
                  {"route", route}, {"bmo", bmo_spec}};
      auto all_inputs = inputs;
      all_inputs.insert(all_inputs.end(), b_inputs.begin(), b_inputs.end());
      finish_field(result.get(), out_path, command_hash(params, all_inputs));
    } else if (ajk->parsed() || bjk->parsed()) {
      auto m = load_symbol(symbol);
      double value = 0.0;
      json params{{"command", ajk->parsed() ? "ajk" : "bjk"}, {"symbol", symbol}, {"center", center},
                  {"half_side", half_side}, {"j", j}, {"k", k}, {"p", p}, {"mesh", mesh}};
      if (ajk->parsed()) {
        params["x"] = x;
        params["xbar"] = xbar;
        check(mslab_estimate_ajk(m.get(), center, half_side, x, xbar, j, k, p, mesh, &value));
      } else {
        check(mslab_estimate_bjk(m.get(), center, half_side, j, k, p, mesh, &value));
      }
      std::cout << json{{"value", number(value)}, {"config_hash", hash_of(params.dump())}}.dump(2) << '\n';
    } else if (maximal->parsed()) {
      const auto mode = window_mode(windows);
      auto f = load_fields(inputs);
      auto ptrs = raw(f);
      mslab_field_t* out = nullptr;
      if (op == "hl" || op == "mdelta" || op == "sharp") {
        if (f.size() != 1) throw Failure(2, "--op " + op + " takes one input field");
      }
      if (op == "hl") check(mslab_maximal_hl(ptrs[0], mode, &out));
      if (op == "mp") check(mslab_maximal_p(ptrs.data(), ptrs.size(), p0, mode, &out));
      if (op == "mdelta") check(mslab_m_delta(ptrs[0], delta, mode, &out));
      if (op == "sharp") check(mslab_sharp_maximal(ptrs[0], delta, mode, &out));
      if (op == "orlicz") check(mslab_orlicz_maximal(ptrs.data(), ptrs.size(), slot, p0, mode, &out));
      Field result(out);
      json params{{"command", "maximal"}, {"op", op}, {"windows", windows}, {"p0", p0},
                  {"delta", delta}, {"slot", slot}};
      finish_field(result.get(), out_path, command_hash(params, inputs));
    } else if (weights->parsed()) {
      const auto mode = window_mode(windows);
      auto g = make_grid(dim, n, L);
      mslab_field_t* w = nullptr;
      check(mslab_weight_from_spec(g.get(), wfamily.c_str(), &w));
      Field wf(w);
      double value = 0.0;
      mslab_window win{};
      check(mslab_ap_characteristic(wf.get(), ap, mode, &value, &win));
      json corner = json::array({win.corner[0]});
      if (dim == 2) corner.push_back(win.corner[1]);
      std::cout << json{{"characteristic", number(value)},
                        {"argmax_window", {{"corner", corner}, {"side", win.side}}}}
                       .dump(2)
                << '\n';
    } else if (oeval->parsed()) {
      json values = json::array();
      for (double t : ts) {
        double v = 0.0;
        check(mslab_young_eval(kind.c_str(), alpha, t, &v));
        values.push_back(number(v));
      }
      std::cout << json{{"kind", kind}, {"alpha", alpha}, {"t", ts}, {"values", values}}.dump(2) << '\n';
    } else if (onorm->parsed()) {
      std::vector<double> samples = ts;
      if (!input_one.empty()) {
        auto f = load_field(input_one);
        size_t count = 0;
        check(mslab_field_size(f.get(), &count));
        std::vector<double> re(count), im(count);
        check(mslab_field_values(f.get(), re.data(), im.data()));
        for (size_t i = 0; i < count; ++i) samples.push_back(std::hypot(re[i], im[i]));
      }
      if (samples.empty()) throw Failure(2, "orlicz-norm needs --values or --input");
      double v = 0.0;
      check(mslab_luxemburg_norm(samples.data(), samples.size(), kind.c_str(), alpha, &v));
      std::cout << json{{"kind", kind}, {"alpha", alpha}, {"norm", number(v)}}.dump(2) << '\n';
    } else if (chk->parsed()) {
      auto m = load_symbol(sym_family.empty() ? symbol : sym_family);
      char* text = nullptr;
      check(mslab_check_condition(m.get(), cond.c_str(), dim, s, eps1, eps2, cp0, &text));
      CString owned(text);
      std::cout << owned.get() << '\n';
    } else if (verify->parsed()) {
      std::string cfg_text;
      if (!config_path.empty()) cfg_text = read_text(config_path);
      char* text = nullptr;
      check(mslab_verify(theorem.c_str(), config_path.empty() ? nullptr : cfg_text.c_str(),
                         out_dir.c_str(), &text));
      CString report_text(text);
      char* summary = nullptr;
      check(mslab_report_summary(report_text.get(), &summary));
      CString owned(summary);
      std::cout << owned.get() << '\n';
    } else if (report->parsed()) {
      const auto text = read_text(report_path);
      char* summary = nullptr;
      check(mslab_report_summary(text.c_str(), &summary));
      CString owned(summary);
      std::cout << owned.get() << '\n';
    } else if (field->parsed()) {
      auto g = make_grid(dim, n, L);
      mslab_field_t* f = nullptr;
      check(field_kind == "weight" ? mslab_weight_from_spec(g.get(), field_spec.c_str(), &f)
                                   : mslab_bmo_function_from_spec(g.get(), field_spec.c_str(), &f));
      Field owned(f);
      check(mslab_field_write(owned.get(), out_path.c_str()));
    }
  } catch (const Failure& e) {
    std::cerr << "mslab: " << e.what() << '\n';
    return e.code();
  } catch (const std::exception& e) {
    std::cerr << "mslab: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
