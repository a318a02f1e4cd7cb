// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "mslab/grid.hpp"

namespace mslab {

// Lattice cube: side_cells cells per axis starting at corner.
struct Window {
  std::array<int, 2> corner{0, 0};
  int side = 1;

  bool operator==(const Window&) const = default;
};

enum class WindowMode { dyadic_translated, all_windows };

struct WindowFamily {
  WindowMode mode = WindowMode::dyadic_translated;
  int max_side = 0;   // 0 means N
  bool wrap = false;  // allow windows that wrap around the torus

  std::vector<int> sides(int n) const;
};

WindowFamily dyadic_windows(int max_side = 0);
WindowFamily all_windows(int max_side = 0);
std::string window_mode_name(WindowMode mode);
WindowMode window_mode_from_name(const std::string& name);

// Flat indices of the cells of a window (wrapping modulo N).
std::vector<std::size_t> window_cells(const Grid& g, const Window& w);
// Sample values of a real array over a window.
std::vector<double> window_values(const Grid& g, const std::vector<double>& values, const Window& w);

// Dilation by an integer factor about the window center; clipped to the
// lattice unless wrap. Sets *clipped when clipping changed the window.
Window dilate(const Grid& g, const Window& w, int factor, bool wrap, bool* clipped = nullptr);
// |2^j Q| - |2^(j-1) Q| in cells (|Q| for j = 0), before clipping.
std::size_t annulus_cell_count(const Grid& g, const Window& w, int j);

// Window sums, minima and maxima of a real array for every admissible
// corner at one side length. Sums come from a summed-area table except for
// single-cell windows, which return the sample itself.
class WindowStats {
 public:
  WindowStats(const Grid& g, const std::vector<double>& values, bool wrap);

  // Number of admissible corners per axis for a side.
  int corners_per_axis(int side) const;
  double sum(const Window& w) const;
  double mean(const Window& w) const;
  // Per-corner minima / maxima (row-major over corners) for one side.
  std::vector<double> minima(int side) const;
  std::vector<double> maxima(int side) const;

 private:
  double rect_sum(int r0, int c0, int rows, int cols) const;

  Grid grid_;
  bool wrap_;
  std::vector<double> values_;
  std::vector<double> prefix_;  // (N+1)^dim summed-area table
};

// Per-point maximum over all windows of the family containing the point,
// where value(w) gives the window statistic.
std::vector<double> max_over_windows_containing(const Grid& g, const WindowFamily& W,
                                                const std::function<double(const Window&)>& value);

struct BestWindow {
  double value = 0.0;
  Window window;
};

// Global maximum of value(w) over the family (first window wins ties).
BestWindow best_window(const Grid& g, const WindowFamily& W,
                       const std::function<double(const Window&)>& value);

// Same scan where the statistic is prepared once per side length: prepare(side)
// returns value(window, corner) with corners numbered row-major.
using CornerValue = std::function<double(const Window&, std::size_t)>;
BestWindow best_window_per_side(const Grid& g, const WindowFamily& W,
                                const std::function<CornerValue(int)>& prepare);

// Hardy-Littlewood: max over windows containing x of mean |f|.
SampledField maximal(const SampledField& f, const WindowFamily& W);
// max over windows of prod_j (mean |f_j|^p0)^(1/p0).
SampledField multilinear_maximal_p(const std::vector<SampledField>& f, double p0,
                                   const WindowFamily& W);
// (M |f|^delta)^(1/delta).
SampledField m_delta(const SampledField& f, double delta, const WindowFamily& W);
// max over windows of (mean | |f|^delta - mean |f|^delta |)^(1/delta).
SampledField sharp_maximal_delta(const SampledField& f, double delta, const WindowFamily& W);
// max over windows of ||f_i||_{Phi,Q} prod_{j != i} (mean |f_j|^p0)^(1/p0),
// Phi(t) = t^p0 (1 + log+ t)^p0.
SampledField orlicz_maximal_slot(const std::vector<SampledField>& f, std::size_t slot,
                                 double p0, const WindowFamily& W);

}  // namespace mslab
