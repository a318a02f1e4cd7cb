// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mslab/mslab.h"

extern "C" int mslab_c_smoke(void);

namespace {

std::string take(char* s) {
  std::string out(s);
  mslab_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("C translation unit") { CHECK(mslab_c_smoke() == 1); }

TEST_CASE("status codes and last error") {
  mslab_grid_t* g = nullptr;
  CHECK(mslab_grid_create(1, 7, 1.0, &g) == MSLAB_ERR_CONFIG);
  CHECK(g == nullptr);
  CHECK(std::string(mslab_last_error()).find("power of two") != std::string::npos);
  CHECK(mslab_grid_create(1, 8, 1.0, nullptr) == MSLAB_ERR_INVALID_ARGUMENT);

  mslab_symbol_t* m = nullptr;
  CHECK(mslab_symbol_parse("expr:r2 +", 0, &m) == MSLAB_ERR_PARSE);
  CHECK(mslab_symbol_parse("nope", 0, &m) == MSLAB_ERR_CONFIG);

  mslab_field_t* f = nullptr;
  CHECK(mslab_field_read("/nonexistent/field.bin", &f) == MSLAB_ERR_IO);

  char* text = nullptr;
  auto cfg = nlohmann::json::parse(take([] {
    char* s = nullptr;
    mslab_builtin_config("T11i", &s);
    return s;
  }()));
  cfg["exponents"]["p_list"] = {1.0, 2.0};
  CHECK(mslab_verify("T11i", cfg.dump().c_str(), nullptr, &text) == MSLAB_ERR_HYPOTHESIS);
  CHECK(std::string(mslab_last_error()).find("requires p1,p2>p0") != std::string::npos);
  CHECK(mslab_verify("T14", cfg.dump().c_str(), nullptr, &text) == MSLAB_ERR_CONFIG);
  CHECK(mslab_verify("T11i", "{", nullptr, &text) == MSLAB_ERR_CONFIG);

  char digest[17];
  CHECK(mslab_hash_text("", digest) == MSLAB_OK);
  CHECK(std::string(digest) == "cbf29ce484222325");  // FNV-1a offset basis
  CHECK(mslab_hash_text("a", digest) == MSLAB_OK);
  CHECK(std::string(digest) == "af63dc4c8601ec8c");
}

TEST_CASE("fields through the C interface") {
  mslab_grid_t* g = nullptr;
  REQUIRE(mslab_grid_create(1, 16, 2.0, &g) == MSLAB_OK);
  int dim = 0, n = 0;
  double L = 0;
  CHECK(mslab_grid_info(g, &dim, &n, &L) == MSLAB_OK);
  CHECK((dim == 1 && n == 16 && L == 2.0));

  std::vector<double> re(16), im(16, 0.0);
  for (int i = 0; i < 16; ++i) re[i] = std::sin(0.3 * i);
  mslab_field_t* f = nullptr;
  REQUIRE(mslab_field_create(g, re.data(), nullptr, &f) == MSLAB_OK);
  const auto path = (std::filesystem::temp_directory_path() / "mslab_capi_field.bin").string();
  CHECK(mslab_field_write(f, path.c_str()) == MSLAB_OK);
  mslab_field_t* back = nullptr;
  REQUIRE(mslab_field_read(path.c_str(), &back) == MSLAB_OK);
  std::vector<double> r2(16), i2(16);
  CHECK(mslab_field_values(back, r2.data(), i2.data()) == MSLAB_OK);
  CHECK(r2 == re);
  CHECK(i2 == im);
  std::remove(path.c_str());

  double norm = 0.0, weak = 0.0;
  CHECK(mslab_lp_norm(f, 2.0, nullptr, &norm) == MSLAB_OK);
  double ref = 0.0;
  for (double v : re) ref += v * v * 2.0 / 16;
  CHECK(norm == doctest::Approx(std::sqrt(ref)).epsilon(1e-14));
  CHECK(mslab_weak_lp_quasinorm(f, 2.0, nullptr, &weak) == MSLAB_OK);
  CHECK(weak <= norm);

  mslab_field_t* M = nullptr;
  CHECK(mslab_maximal_hl(f, MSLAB_WINDOWS_ALL, &M) == MSLAB_OK);
  std::vector<double> mr(16), mi(16);
  mslab_field_values(M, mr.data(), mi.data());
  for (int i = 0; i < 16; ++i) CHECK(mr[i] >= std::abs(re[i]));

  mslab_field_free(M);
  mslab_field_free(back);
  mslab_field_free(f);
  mslab_grid_free(g);
}

TEST_CASE("operators through the C interface") {
  mslab_grid_t* g = nullptr;
  mslab_grid_create(1, 16, 1.0, &g);
  std::vector<double> a(16), b(16);
  for (int i = 0; i < 16; ++i) {
    a[i] = std::cos(0.7 * i);
    b[i] = std::sin(1.1 * i) + 0.2;
  }
  mslab_field_t *f1 = nullptr, *f2 = nullptr;
  mslab_field_create(g, a.data(), nullptr, &f1);
  mslab_field_create(g, b.data(), nullptr, &f2);
  mslab_symbol_t* m = nullptr;
  REQUIRE(mslab_symbol_parse("gauss_bump", 0, &m) == MSLAB_OK);
  int arity = 0;
  mslab_symbol_arity(m, &arity);
  CHECK(arity == 2);
  const double x1[2] = {1.0, 0.0}, x2[2] = {0.5, 0.0};
  double vr = 0, vi = 0;
  CHECK(mslab_symbol_eval(m, x1, x2, &vr, &vi) == MSLAB_OK);
  CHECK(vr == doctest::Approx(1.25 * std::exp(-1.25)));

  const mslab_field_t* fs[2] = {f1, f2};
  mslab_field_t *sm = nullptr, *sk = nullptr;
  CHECK(mslab_square_multiplier(m, fs, 2, nullptr, &sm) == MSLAB_OK);
  CHECK(mslab_square_kernel(m, fs, 2, nullptr, &sk) == MSLAB_OK);
  double nm = 0, nk = 0;
  mslab_lp_norm(sm, 2.0, nullptr, &nm);
  mslab_lp_norm(sk, 2.0, nullptr, &nk);
  CHECK(nk == doctest::Approx(nm).epsilon(0.02));
  CHECK(mslab_square_multiplier(m, fs, 1, nullptr, &sm) == MSLAB_ERR_CONFIG);

  double disc = 1.0;
  CHECK(mslab_square_identity_check(m, f1, f2, nullptr, &disc) == MSLAB_OK);
  CHECK(disc < 1e-8);

  char* json = nullptr;
  REQUIRE(mslab_check_condition(m, "eq13", 1, 2, 1.0, 1.0, 1.5, &json) == MSLAB_OK);
  const auto rep = nlohmann::json::parse(take(json));
  CHECK(rep["condition"] == "eq13");
  CHECK(rep["entries"].size() > 0);

  mslab_field_free(sm);
  mslab_field_free(sk);
  mslab_symbol_free(m);
  mslab_field_free(f1);
  mslab_field_free(f2);
  mslab_grid_free(g);
}

TEST_CASE("weights and Young functions through the C interface") {
  mslab_grid_t* g = nullptr;
  mslab_grid_create(1, 64, 1.0, &g);
  mslab_field_t* w = nullptr;
  REQUIRE(mslab_weight_from_spec(g, "unit", &w) == MSLAB_OK);
  double c = 0;
  mslab_window win{};
  CHECK(mslab_ap_characteristic(w, 2.0, MSLAB_WINDOWS_ALL, &c, &win) == MSLAB_OK);
  CHECK(c == 1.0);
  CHECK(mslab_ap_characteristic(w, 1.0, MSLAB_WINDOWS_DYADIC, &c, nullptr) == MSLAB_OK);
  CHECK(c == 1.0);
  CHECK(mslab_ap_characteristic(w, 0.5, MSLAB_WINDOWS_DYADIC, &c, nullptr) == MSLAB_ERR_CONFIG);
  mslab_field_free(w);

  double v = 0;
  CHECK(mslab_young_eval("phi", 1.0, std::exp(1.0), &v) == MSLAB_OK);
  CHECK(v == doctest::Approx(2.0 * std::exp(1.0)));
  CHECK(mslab_young_eval("psi", 1.0, 1.0, &v) == MSLAB_ERR_CONFIG);
  const double s[3] = {2.0, 2.0, 2.0};
  CHECK(mslab_luxemburg_norm(s, 3, "phi", 2.0, &v) == MSLAB_OK);
  CHECK(v == doctest::Approx(2.0).epsilon(1e-8));
  mslab_grid_free(g);
}

TEST_CASE("verify and report summary") {
  char* cfg_text = nullptr;
  REQUIRE(mslab_builtin_config("P31scale", &cfg_text) == MSLAB_OK);
  auto cfg = nlohmann::json::parse(take(cfg_text));
  cfg["ensemble"]["count"] = 2;
  char* report = nullptr;
  REQUIRE(mslab_verify("P31scale", cfg.dump().c_str(), nullptr, &report) == MSLAB_OK);
  const std::string text = take(report);
  char* summary = nullptr;
  REQUIRE(mslab_report_summary(text.c_str(), &summary) == MSLAB_OK);
  const auto s = nlohmann::json::parse(take(summary));
  CHECK(s["count"] == 2);
  CHECK(s["max_ratio"].get<double>() < 1e-3);
  CHECK(mslab_report_summary("{}", &summary) == MSLAB_ERR_CONFIG);
  CHECK(std::strlen(mslab_version()) > 0);
}
