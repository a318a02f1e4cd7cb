// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mslab/grid.hpp"
#include "mslab/maximal.hpp"
#include "mslab/operators.hpp"

namespace mslab {

struct EnsembleSpec {
  int count = 50;
  std::uint64_t seed = 1;
  std::string generator = "random_trig";  // random_trig, random_bumps, zero
  int deg = 0;                            // random_trig degree; 0 means base N / 8
  int bumps = 3;                          // random_bumps count
  std::array<double, 2> support{0.25, 0.75};  // fraction of L per axis
};

struct ScalingSpec {
  double a = 2.0;  // dilation factor
  int mesh = 32;   // annulus mesh
};

// One verification target. JSON field names mirror the members (see
// docs/report-schema.md).
struct TrialConfig {
  std::string theorem_id;
  int dim = 1;
  int n = 128;
  double box_length = 1.0;
  std::string symbol = "gauss_bump";
  ExponentConfig exponents;
  double epsilon = 0.5;  // M_epsilon exponent in the commutator domination
  double q0 = 0.0;       // maximal exponent in the commutator domination; 0 = unset
  std::vector<std::string> weights{"unit"};
  std::vector<std::string> bmo{"log"};
  EnsembleSpec ensemble;
  std::optional<TQuad> tquad;  // default_tquad of the base grid when empty
  WindowFamily windows;
  bool refinement = true;  // repeat the ensemble at 2N
  ScalingSpec scaling;
};

const std::vector<std::string>& theorem_ids();

// Parses and normalizes a config. Throws ConfigError on malformed input.
TrialConfig parse_trial_config(const std::string& json_text);
// Built-in config text for a theorem id (also shipped as configs/<id>.json).
std::string builtin_config(const std::string& theorem_id);

// Config with defaults resolved, serialized with sorted keys.
std::string canonical_config_json(const TrialConfig& cfg);
// FNV-1a 64-bit digest of the canonical JSON as 16 hex digits.
std::string config_hash(const TrialConfig& cfg);

// Throws HypothesisError naming the first violated hypothesis of the target.
void validate_hypotheses(const TrialConfig& cfg);

// Per-trial generator seeded from (seed, index) only.
std::mt19937_64 trial_rng(std::uint64_t seed, std::size_t index);
// Input fields of a trial sampled on g (same continuum functions on every
// grid of the same box).
std::vector<SampledField> generate_inputs(const TrialConfig& cfg, const Grid& g,
                                          std::size_t index, int arity);

struct TrialRecord {
  std::size_t index = 0;
  int n = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool degenerate = false;
  std::string config_hash;
  std::vector<std::string> notes;
};

struct ReportSummary {
  std::size_t count = 0;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  std::optional<double> refinement_drift;  // max ratio at 2N / max ratio at N
  bool nan_flag = false;
  std::size_t degenerate_count = 0;
};

struct Report {
  TrialConfig config;
  std::vector<TrialRecord> records;
  std::vector<TrialRecord> refinement_records;
  ReportSummary summary;
  std::vector<std::string> notes;
};

// Trial on the config grid (or a grid with n_override points per axis).
TrialRecord run_trial(const TrialConfig& cfg, std::size_t index, int n_override = 0);
ReportSummary summarize(const std::vector<TrialRecord>& records,
                        const std::vector<TrialRecord>& refinement_records);
// Validates hypotheses, runs count trials (and the 2N repeat), aggregates.
Report ensemble_report(const TrialConfig& cfg);
// Pointwise domination report for kind in {L43, L44, L46}.
Report domination_field_check(const std::string& kind, const TrialConfig& cfg);

std::string report_json(const Report& r);
std::string report_csv(const Report& r);
std::string ratios_dat(const Report& r);
// Writes report.json, report.csv and ratios.dat into dir (created if absent).
void write_report_files(const Report& r, const std::string& dir);

// Summary recomputed from the records of a report.json document.
ReportSummary summary_from_report_json(const std::string& json_text);

}  // namespace mslab
