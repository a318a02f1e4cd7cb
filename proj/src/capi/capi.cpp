// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#include "mslab/mslab.h"

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mslab/error.hpp"
#include "mslab/grid.hpp"
#include "mslab/harness.hpp"
#include "mslab/maximal.hpp"
#include "mslab/operators.hpp"
#include "mslab/orlicz.hpp"
#include "mslab/symbols.hpp"
#include "mslab/weights.hpp"

struct mslab_grid {
  mslab::Grid grid;
};

struct mslab_field {
  mslab::SampledField field;
};

struct mslab_symbol {
  mslab::Symbol symbol;
};

namespace {

using json = nlohmann::json;

thread_local std::string last_error;

mslab_status fail(mslab_status code, const std::string& message) {
  last_error = message;
  return code;
}

template <typename Fn>
mslab_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return MSLAB_OK;
  } catch (const mslab::HypothesisError& e) {
    return fail(MSLAB_ERR_HYPOTHESIS, e.what());
  } catch (const mslab::ParseError& e) {
    return fail(MSLAB_ERR_PARSE, e.what());
  } catch (const mslab::ConfigError& e) {
    return fail(MSLAB_ERR_CONFIG, e.what());
  } catch (const mslab::IoError& e) {
    return fail(MSLAB_ERR_IO, e.what());
  } catch (const mslab::ResourceError& e) {
    return fail(MSLAB_ERR_RESOURCE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MSLAB_ERR_RESOURCE, "out of memory");
  } catch (const std::invalid_argument& e) {
    return fail(MSLAB_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(MSLAB_ERR_INTERNAL, e.what());
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) throw std::invalid_argument(std::string(what) + " must not be null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<mslab::SampledField> gather(const mslab_field_t* const* fields, size_t count) {
  need(fields, "fields");
  std::vector<mslab::SampledField> out;
  for (size_t i = 0; i < count; ++i) {
    need(fields[i], "field");
    out.push_back(fields[i]->field);
  }
  return out;
}

mslab::TQuad tquad_or_default(const mslab_tquad* q, const mslab::Grid& g) {
  if (q == nullptr) return mslab::default_tquad(g);
  mslab::TQuad t{q->t_min, q->t_max, q->nodes_per_octave};
  t.validate();
  return t;
}

mslab::WindowFamily family(mslab_window_mode mode) {
  switch (mode) {
    case MSLAB_WINDOWS_DYADIC:
      return mslab::dyadic_windows();
    case MSLAB_WINDOWS_ALL:
      return mslab::all_windows();
  }
  throw mslab::ConfigError("unknown window mode");
}

void emit(mslab_field_t** out, mslab::SampledField f) {
  *out = new mslab_field{std::move(f)};
}

json number(double v) {
  if (std::isfinite(v)) return v;
  return mslab::format_double(v);
}

std::string condition_json(const mslab::ConditionReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"level", e.level},
                       {"multiindex", e.multiindex},
                       {"margin", number(e.margin)},
                       {"finite", e.finite}});
  }
  json j{{"condition", mslab::condition_name(r.condition)},
         {"overall_margin", number(r.overall_margin)},
         {"margins_bounded", r.margins_bounded},
         {"low_end_slope", number(r.low_end_slope)},
         {"high_end_slope", number(r.high_end_slope)},
         {"derivative_step", number(r.derivative_step)},
         {"level_min", r.level_min},
         {"level_max", r.level_max},
         {"entries", entries}};
  return j.dump(2);
}

}  // namespace

extern "C" {

const char* mslab_last_error(void) { return last_error.c_str(); }

const char* mslab_version(void) { return "0.1.0"; }

void mslab_string_free(char* s) { std::free(s); }

mslab_status mslab_hash_text(const char* text, char out[17]) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char* c = text; *c != '\0'; ++c) {
      h ^= static_cast<unsigned char>(*c);
      h *= 0x100000001b3ULL;
    }
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
      out[i] = digits[h & 0xF];
      h >>= 4;
    }
    out[16] = '\0';
  });
}

mslab_status mslab_grid_create(int dim, int n, double box_length, mslab_grid_t** out) {
  return guarded([&] {
    need(out, "out");
    *out = new mslab_grid{mslab::make_grid(dim, n, box_length)};
  });
}

void mslab_grid_free(mslab_grid_t* g) { delete g; }

mslab_status mslab_grid_info(const mslab_grid_t* g, int* dim, int* n, double* box_length) {
  return guarded([&] {
    need(g, "grid");
    if (dim) *dim = g->grid.dim();
    if (n) *n = g->grid.points_per_axis();
    if (box_length) *box_length = g->grid.box_length();
  });
}

mslab_status mslab_field_create(const mslab_grid_t* g, const double* re, const double* im,
                                mslab_field_t** out) {
  return guarded([&] {
    need(g, "grid");
    need(re, "re");
    need(out, "out");
    std::vector<mslab::cplx> v(g->grid.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = {re[i], im ? im[i] : 0.0};
    emit(out, mslab::SampledField(g->grid, std::move(v)));
  });
}

void mslab_field_free(mslab_field_t* f) { delete f; }

mslab_status mslab_field_size(const mslab_field_t* f, size_t* size) {
  return guarded([&] {
    need(f, "field");
    need(size, "size");
    *size = f->field.size();
  });
}

mslab_status mslab_field_values(const mslab_field_t* f, double* re, double* im) {
  return guarded([&] {
    need(f, "field");
    for (size_t i = 0; i < f->field.size(); ++i) {
      if (re) re[i] = f->field[i].real();
      if (im) im[i] = f->field[i].imag();
    }
  });
}

mslab_status mslab_field_grid(const mslab_field_t* f, mslab_grid_t** out) {
  return guarded([&] {
    need(f, "field");
    need(out, "out");
    *out = new mslab_grid{f->field.grid()};
  });
}

mslab_status mslab_field_read(const char* path, mslab_field_t** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    emit(out, mslab::read_field_file(path));
  });
}

mslab_status mslab_field_write(const mslab_field_t* f, const char* path) {
  return guarded([&] {
    need(f, "field");
    need(path, "path");
    mslab::write_field_file(f->field, path);
  });
}

mslab_status mslab_field_write_csv(const mslab_field_t* f, const char* path) {
  return guarded([&] {
    need(f, "field");
    need(path, "path");
    std::ofstream out(path);
    if (!out) throw mslab::IoError(std::string("cannot open ") + path);
    mslab::write_field_csv(f->field, out);
    if (!out) throw mslab::IoError(std::string("cannot write ") + path);
  });
}

mslab_status mslab_lp_norm(const mslab_field_t* f, double p, const mslab_field_t* w, double* out) {
  return guarded([&] {
    need(f, "field");
    need(out, "out");
    std::optional<mslab::SampledField> wf;
    if (w) wf = w->field;
    *out = mslab::lp_norm(f->field, p, wf);
  });
}

mslab_status mslab_weak_lp_quasinorm(const mslab_field_t* f, double p, const mslab_field_t* w,
                                     double* out) {
  return guarded([&] {
    need(f, "field");
    need(out, "out");
    std::optional<mslab::SampledField> wf;
    if (w) wf = w->field;
    *out = mslab::weak_lp_quasinorm(f->field, p, wf);
  });
}

mslab_status mslab_symbol_parse(const char* spec, int arity_hint, mslab_symbol_t** out) {
  return guarded([&] {
    need(spec, "spec");
    need(out, "out");
    *out = new mslab_symbol{mslab::symbol_from_spec(spec, arity_hint)};
  });
}

void mslab_symbol_free(mslab_symbol_t* m) { delete m; }

mslab_status mslab_symbol_arity(const mslab_symbol_t* m, int* arity) {
  return guarded([&] {
    need(m, "symbol");
    need(arity, "arity");
    *arity = m->symbol.arity();
  });
}

mslab_status mslab_symbol_eval(const mslab_symbol_t* m, const double xi1[2], const double xi2[2],
                               double* re, double* im) {
  return guarded([&] {
    need(m, "symbol");
    need(xi1, "xi1");
    mslab::Freq a{xi1[0], xi1[1]};
    mslab::Freq b{0.0, 0.0};
    if (m->symbol.arity() == 2) {
      need(xi2, "xi2");
      b = {xi2[0], xi2[1]};
    }
    const auto v = m->symbol(a, b);
    if (re) *re = v.real();
    if (im) *im = v.imag();
  });
}

mslab_status mslab_check_condition(const mslab_symbol_t* m, const char* cond, int dim, int s,
                                   double eps1, double eps2, double p0, char** json_out) {
  return guarded([&] {
    need(m, "symbol");
    need(cond, "cond");
    need(json_out, "json_out");
    const auto id = mslab::condition_from_name(cond);
    mslab::ConditionReport rep;
    if (id == mslab::ConditionId::H2 || id == mslab::ConditionId::H3 ||
        id == mslab::ConditionId::XY_smooth) {
      if (dim != 1) throw mslab::ConfigError("kernel conditions are checked in dim 1");
      mslab::KernelCheckOptions opts;
      opts.p0 = p0;
      rep = mslab::check_kernel_condition(m->symbol, id, opts);
    } else {
      mslab::DecayCheckOptions opts;
      opts.dim = dim;
      opts.s = s;
      opts.eps1 = eps1;
      opts.eps2 = eps2;
      rep = mslab::check_decay_condition(m->symbol, id, opts);
    }
    *json_out = dup_string(condition_json(rep));
  });
}

mslab_status mslab_default_tquad(const mslab_grid_t* g, mslab_tquad* out) {
  return guarded([&] {
    need(g, "grid");
    need(out, "out");
    const auto q = mslab::default_tquad(g->grid);
    *out = {q.t_min, q.t_max, q.nodes_per_octave};
  });
}

mslab_status mslab_square_multiplier(const mslab_symbol_t* m, const mslab_field_t* const* fields,
                                     size_t count, const mslab_tquad* tquad, mslab_field_t** out) {
  return guarded([&] {
    need(m, "symbol");
    need(out, "out");
    const auto f = gather(fields, count);
    if (f.empty()) throw mslab::ConfigError("need at least one input field");
    emit(out, mslab::square_multiplier(m->symbol, f, tquad_or_default(tquad, f.front().grid())));
  });
}

mslab_status mslab_square_kernel(const mslab_symbol_t* m, const mslab_field_t* const* fields,
                                 size_t count, const mslab_tquad* tquad, mslab_field_t** out) {
  return guarded([&] {
    need(m, "symbol");
    need(out, "out");
    const auto f = gather(fields, count);
    if (f.empty()) throw mslab::ConfigError("need at least one input field");
    emit(out, mslab::square_kernel(m->symbol, f, tquad_or_default(tquad, f.front().grid())));
  });
}

mslab_status mslab_commutator(const mslab_symbol_t* m, const mslab_field_t* const* b,
                              const mslab_field_t* const* fields, size_t count,
                              const mslab_tquad* tquad, int kernel_route, mslab_field_t** out) {
  return guarded([&] {
    need(m, "symbol");
    need(out, "out");
    const auto f = gather(fields, count);
    const auto bb = gather(b, count);
    if (f.empty()) throw mslab::ConfigError("need at least one input field");
    const auto q = tquad_or_default(tquad, f.front().grid());
    emit(out, kernel_route ? mslab::commutator_square(m->symbol, bb, f, q)
                           : mslab::commutator_multiplier(m->symbol, bb, f, q));
  });
}

mslab_status mslab_square_identity_check(const mslab_symbol_t* m, const mslab_field_t* f1,
                                         const mslab_field_t* f2, const mslab_tquad* tquad,
                                         double* out) {
  return guarded([&] {
    need(m, "symbol");
    need(f1, "f1");
    need(f2, "f2");
    need(out, "out");
    *out = mslab::square_identity_check(m->symbol, f1->field, f2->field,
                                        tquad_or_default(tquad, f1->field.grid()));
  });
}

mslab_status mslab_estimate_ajk(const mslab_symbol_t* m, double center, double half_side, double x,
                                double xbar, int j, int k, double p, int mesh, double* out) {
  return guarded([&] {
    need(m, "symbol");
    need(out, "out");
    mslab::AnnulusOptions opts;
    if (mesh > 0) opts.mesh = mesh;
    *out = mslab::estimate_Ajk(m->symbol, {center, half_side}, x, xbar, j, k, p, opts);
  });
}

mslab_status mslab_estimate_bjk(const mslab_symbol_t* m, double center, double half_side, int j,
                                int k, double p, int mesh, double* out) {
  return guarded([&] {
    need(m, "symbol");
    need(out, "out");
    mslab::AnnulusOptions opts;
    if (mesh > 0) opts.mesh = mesh;
    *out = mslab::estimate_Bjk(m->symbol, {center, half_side}, j, k, p, opts);
  });
}

mslab_status mslab_maximal_hl(const mslab_field_t* f, mslab_window_mode mode, mslab_field_t** out) {
  return guarded([&] {
    need(f, "field");
    need(out, "out");
    emit(out, mslab::maximal(f->field, family(mode)));
  });
}

mslab_status mslab_maximal_p(const mslab_field_t* const* fields, size_t count, double p0,
                             mslab_window_mode mode, mslab_field_t** out) {
  return guarded([&] {
    need(out, "out");
    emit(out, mslab::multilinear_maximal_p(gather(fields, count), p0, family(mode)));
  });
}

mslab_status mslab_m_delta(const mslab_field_t* f, double delta, mslab_window_mode mode,
                           mslab_field_t** out) {
  return guarded([&] {
    need(f, "field");
    need(out, "out");
    emit(out, mslab::m_delta(f->field, delta, family(mode)));
  });
}

mslab_status mslab_sharp_maximal(const mslab_field_t* f, double delta, mslab_window_mode mode,
                                 mslab_field_t** out) {
  return guarded([&] {
    need(f, "field");
    need(out, "out");
    emit(out, mslab::sharp_maximal_delta(f->field, delta, family(mode)));
  });
}

mslab_status mslab_orlicz_maximal(const mslab_field_t* const* fields, size_t count, size_t slot,
                                  double p0, mslab_window_mode mode, mslab_field_t** out) {
  return guarded([&] {
    need(out, "out");
    emit(out, mslab::orlicz_maximal_slot(gather(fields, count), slot, p0, family(mode)));
  });
}

mslab_status mslab_weight_from_spec(const mslab_grid_t* g, const char* spec, mslab_field_t** out) {
  return guarded([&] {
    need(g, "grid");
    need(spec, "spec");
    need(out, "out");
    emit(out, mslab::weight_from_spec(spec, g->grid));
  });
}

mslab_status mslab_bmo_function_from_spec(const mslab_grid_t* g, const char* spec,
                                          mslab_field_t** out) {
  return guarded([&] {
    need(g, "grid");
    need(spec, "spec");
    need(out, "out");
    emit(out, mslab::bmo_function_from_spec(spec, g->grid));
  });
}

mslab_status mslab_ap_characteristic(const mslab_field_t* w, double p, mslab_window_mode mode,
                                     double* out, mslab_window* argmax) {
  return guarded([&] {
    need(w, "weight");
    need(out, "out");
    const auto rep = p == 1.0 ? mslab::a1_characteristic(w->field, family(mode))
                              : mslab::ap_characteristic(w->field, p, family(mode));
    *out = rep.characteristic;
    if (argmax) {
      argmax->corner[0] = rep.argmax_window.corner[0];
      argmax->corner[1] = rep.argmax_window.corner[1];
      argmax->side = rep.argmax_window.side;
    }
  });
}

mslab_status mslab_multi_ap_characteristic(const mslab_field_t* const* w, size_t count,
                                           const double* p_list, double p0,
                                           mslab_window_mode mode, double* out) {
  return guarded([&] {
    need(p_list, "p_list");
    need(out, "out");
    *out = mslab::multi_ap_characteristic(gather(w, count), std::vector<double>(p_list, p_list + count),
                                          p0, family(mode))
               .characteristic;
  });
}

mslab_status mslab_nu_weight(const mslab_field_t* const* w, size_t count, const double* p_list,
                             mslab_field_t** out) {
  return guarded([&] {
    need(p_list, "p_list");
    need(out, "out");
    emit(out, mslab::nu_weight(gather(w, count), std::vector<double>(p_list, p_list + count)));
  });
}

mslab_status mslab_bmo_norm(const mslab_field_t* b, mslab_window_mode mode, double* out) {
  return guarded([&] {
    need(b, "field");
    need(out, "out");
    *out = mslab::bmo_norm(b->field, family(mode));
  });
}

mslab_status mslab_young_eval(const char* kind, double alpha, double t, double* out) {
  return guarded([&] {
    need(kind, "kind");
    need(out, "out");
    if (!(alpha > 0.0)) throw mslab::ConfigError("alpha must be positive");
    if (!(t >= 0.0)) throw mslab::ConfigError("t must be nonnegative");
    *out = mslab::YoungFn{mslab::young_kind_from_name(kind), alpha}(t);
  });
}

mslab_status mslab_luxemburg_norm(const double* samples, size_t count, const char* kind,
                                  double alpha, double* out) {
  return guarded([&] {
    need(samples, "samples");
    need(kind, "kind");
    need(out, "out");
    if (!(alpha > 0.0)) throw mslab::ConfigError("alpha must be positive");
    *out = mslab::luxemburg_norm(std::vector<double>(samples, samples + count),
                                 {mslab::young_kind_from_name(kind), alpha});
  });
}

mslab_status mslab_builtin_config(const char* theorem_id, char** json_out) {
  return guarded([&] {
    need(theorem_id, "theorem_id");
    need(json_out, "json_out");
    *json_out = dup_string(mslab::builtin_config(theorem_id));
  });
}

mslab_status mslab_verify(const char* theorem_id, const char* config_json, const char* out_dir,
                          char** report_json) {
  return guarded([&] {
    need(theorem_id, "theorem_id");
    const std::string text = config_json ? std::string(config_json) : mslab::builtin_config(theorem_id);
    const auto cfg = mslab::parse_trial_config(text);
    if (cfg.theorem_id != theorem_id) {
      throw mslab::ConfigError("config theorem_id '" + cfg.theorem_id + "' does not match '" +
                               theorem_id + "'");
    }
    const auto rep = mslab::ensemble_report(cfg);
    if (out_dir) mslab::write_report_files(rep, out_dir);
    if (report_json) *report_json = dup_string(mslab::report_json(rep));
  });
}

mslab_status mslab_report_summary(const char* report_json, char** summary_json) {
  return guarded([&] {
    need(report_json, "report_json");
    need(summary_json, "summary_json");
    const auto s = mslab::summary_from_report_json(report_json);
    json j{{"count", s.count},
           {"max_ratio", number(s.max_ratio)},
           {"median_ratio", number(s.median_ratio)},
           {"refinement_drift", s.refinement_drift ? number(*s.refinement_drift) : json(nullptr)},
           {"nan_flag", s.nan_flag},
           {"degenerate_count", s.degenerate_count}};
    *summary_json = dup_string(j.dump(2));
  });
}

}  // extern "C"
