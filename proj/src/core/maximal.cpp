// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#include "mslab/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "mslab/error.hpp"
#include "mslab/orlicz.hpp"
#include "mslab/parallel.hpp"

namespace mslab {

std::vector<int> WindowFamily::sides(int n) const {
  const int top = max_side <= 0 ? n : std::min(max_side, n);
  std::vector<int> out;
  if (mode == WindowMode::dyadic_translated) {
    for (int s = 1; s <= top; s *= 2) out.push_back(s);
  } else {
    for (int s = 1; s <= top; ++s) out.push_back(s);
  }
  return out;
}

WindowFamily dyadic_windows(int max_side) {
  return WindowFamily{WindowMode::dyadic_translated, max_side, false};
}

WindowFamily all_windows(int max_side) { return WindowFamily{WindowMode::all_windows, max_side, false}; }

std::string window_mode_name(WindowMode mode) {
  return mode == WindowMode::dyadic_translated ? "dyadic" : "all";
}

WindowMode window_mode_from_name(const std::string& name) {
  if (name == "dyadic" || name == "dyadic_translated") return WindowMode::dyadic_translated;
  if (name == "all" || name == "all_windows") return WindowMode::all_windows;
  throw ConfigError("unknown window family '" + name + "'");
}

std::vector<std::size_t> window_cells(const Grid& g, const Window& w) {
  const int n = g.points_per_axis();
  std::vector<std::size_t> out;
  if (g.dim() == 1) {
    for (int i = 0; i < w.side; ++i) out.push_back(static_cast<std::size_t>((w.corner[0] + i) % n));
    return out;
  }
  for (int i = 0; i < w.side; ++i) {
    for (int j = 0; j < w.side; ++j) {
      out.push_back(g.flat_index((w.corner[0] + i) % n, (w.corner[1] + j) % n));
    }
  }
  return out;
}

std::vector<double> window_values(const Grid& g, const std::vector<double>& values, const Window& w) {
  std::vector<double> out;
  for (auto i : window_cells(g, w)) out.push_back(values[i]);
  return out;
}

Window dilate(const Grid& g, const Window& w, int factor, bool wrap, bool* clipped) {
  if (factor < 1) throw ConfigError("dilation factor must be >= 1");
  const int n = g.points_per_axis();
  const int side = w.side * factor;
  const int shift = (side - w.side) / 2;
  Window out{{w.corner[0] - shift, g.dim() == 2 ? w.corner[1] - shift : 0}, side};
  bool changed = false;
  if (wrap) {
    if (out.side > n) {
      out.side = n;
      changed = true;
    }
    for (int a = 0; a < g.dim(); ++a) out.corner[static_cast<std::size_t>(a)] =
        ((out.corner[static_cast<std::size_t>(a)] % n) + n) % n;
  } else {
    for (int a = 0; a < g.dim(); ++a) {
      auto& c = out.corner[static_cast<std::size_t>(a)];
      int lo = c;
      int hi = c + side;
      if (lo < 0) {
        lo = 0;
        changed = true;
      }
      if (hi > n) {
        hi = n;
        changed = true;
      }
      c = lo;
      out.side = std::min(out.side, hi - lo);
    }
  }
  if (clipped) *clipped = changed;
  return out;
}

std::size_t annulus_cell_count(const Grid& g, const Window& w, int j) {
  if (j < 0) throw ConfigError("annulus index must be nonnegative");
  auto volume = [&](long side) {
    return static_cast<std::size_t>(g.dim() == 1 ? side : side * side);
  };
  const long s = w.side;
  if (j == 0) return volume(s);
  return volume(s << j) - volume(s << (j - 1));
}

// --- window statistics --------------------------------------------------------

namespace {

// out[x] = best over virtual indices v in [lo(x), hi(x)] of at(v); both
// bounds nondecreasing in x. Empty ranges give fallback.
template <typename Lo, typename Hi, typename At, typename Better>
std::vector<double> monotone_window(int count, Lo lo, Hi hi, At at, Better better, double fallback) {
  std::vector<double> out(static_cast<std::size_t>(count), fallback);
  std::deque<int> dq;
  int next = count > 0 ? lo(0) : 0;
  for (int x = 0; x < count; ++x) {
    const int l = lo(x);
    const int h = hi(x);
    if (next < l) next = l;
    for (; next <= h; ++next) {
      const double v = at(next);
      while (!dq.empty() && !better(at(dq.back()), v)) dq.pop_back();
      dq.push_back(next);
    }
    while (!dq.empty() && dq.front() < l) dq.pop_front();
    if (!dq.empty() && l <= h) out[static_cast<std::size_t>(x)] = at(dq.front());
  }
  return out;
}

int wrap_index(int v, int n) { return ((v % n) + n) % n; }

// Extreme over cells [c, c + side) for every admissible corner c of a line.
template <typename Better>
std::vector<double> line_cells_extreme(const std::vector<double>& line, int side, bool wrap,
                                       Better better) {
  const int n = static_cast<int>(line.size());
  const int corners = wrap ? n : n - side + 1;
  return monotone_window(
      corners, [](int c) { return c; }, [side](int c) { return c + side - 1; },
      [&](int v) { return line[static_cast<std::size_t>(wrap_index(v, n))]; }, better, 0.0);
}

// Spread corner values to points: out[x] = max over corners whose window
// covers x.
std::vector<double> line_spread_max(const std::vector<double>& corner_vals, int n, int side,
                                    bool wrap) {
  const int corners = static_cast<int>(corner_vals.size());
  auto better = [](double a, double b) { return a > b; };
  if (wrap) {
    return monotone_window(
        n, [side](int x) { return x - side + 1; }, [](int x) { return x; },
        [&](int v) { return corner_vals[static_cast<std::size_t>(wrap_index(v, n))]; }, better,
        0.0);
  }
  return monotone_window(
      n, [side](int x) { return std::max(0, x - side + 1); },
      [corners](int x) { return std::min(x, corners - 1); },
      [&](int v) { return corner_vals[static_cast<std::size_t>(v)]; }, better, 0.0);
}

template <typename Better>
std::vector<double> corner_extremes(const Grid& g, const std::vector<double>& values, int side,
                                    bool wrap, Better better) {
  const int n = g.points_per_axis();
  if (g.dim() == 1) return line_cells_extreme(values, side, wrap, better);
  const int corners = wrap ? n : n - side + 1;
  const auto cn = static_cast<std::size_t>(corners);
  const auto nn = static_cast<std::size_t>(n);
  // Along axis 1 for every row, then along axis 0 for every corner column.
  std::vector<double> rows(nn * cn);
  std::vector<double> line(nn);
  for (std::size_t r = 0; r < nn; ++r) {
    for (std::size_t c = 0; c < nn; ++c) line[c] = values[r * nn + c];
    const auto ext = line_cells_extreme(line, side, wrap, better);
    std::copy(ext.begin(), ext.end(), rows.begin() + static_cast<long>(r * cn));
  }
  std::vector<double> out(cn * cn);
  for (std::size_t c = 0; c < cn; ++c) {
    for (std::size_t r = 0; r < nn; ++r) line[r] = rows[r * cn + c];
    const auto ext = line_cells_extreme(line, side, wrap, better);
    for (std::size_t r = 0; r < cn; ++r) out[r * cn + c] = ext[r];
  }
  return out;
}

}  // namespace

WindowStats::WindowStats(const Grid& g, const std::vector<double>& values, bool wrap)
    : grid_(g), wrap_(wrap), values_(values) {
  if (values.size() != g.size()) throw ConfigError("window statistics need one value per cell");
  const auto n = static_cast<std::size_t>(g.points_per_axis());
  if (g.dim() == 1) {
    prefix_.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix_[i + 1] = prefix_[i] + values[i];
  } else {
    const std::size_t w = n + 1;
    prefix_.assign(w * w, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        row += values[i * n + j];
        prefix_[(i + 1) * w + (j + 1)] = prefix_[i * w + (j + 1)] + row;
      }
    }
  }
}

int WindowStats::corners_per_axis(int side) const {
  const int n = grid_.points_per_axis();
  return wrap_ ? n : n - side + 1;
}

double WindowStats::rect_sum(int r0, int c0, int rows, int cols) const {
  if (grid_.dim() == 1) return prefix_[static_cast<std::size_t>(r0 + rows)] - prefix_[static_cast<std::size_t>(r0)];
  const auto w = static_cast<std::size_t>(grid_.points_per_axis() + 1);
  const auto r1 = static_cast<std::size_t>(r0 + rows);
  const auto c1 = static_cast<std::size_t>(c0 + cols);
  const auto ra = static_cast<std::size_t>(r0);
  const auto ca = static_cast<std::size_t>(c0);
  return prefix_[r1 * w + c1] - prefix_[ra * w + c1] - prefix_[r1 * w + ca] + prefix_[ra * w + ca];
}

double WindowStats::sum(const Window& w) const {
  const int n = grid_.points_per_axis();
  if (w.side == 1) {
    return values_[grid_.flat_index(w.corner[0] % n, grid_.dim() == 2 ? w.corner[1] % n : 0)];
  }
  // Split wrapped ranges into at most two runs per axis.
  auto runs = [n](int start, int len) {
    std::vector<std::pair<int, int>> out;
    start %= n;
    if (start + len <= n) {
      out.emplace_back(start, len);
    } else {
      out.emplace_back(start, n - start);
      out.emplace_back(0, start + len - n);
    }
    return out;
  };
  double total = 0.0;
  const auto r = runs(w.corner[0], w.side);
  if (grid_.dim() == 1) {
    for (const auto& [s, l] : r) total += rect_sum(s, 0, l, 0);
    return total;
  }
  const auto c = runs(w.corner[1], w.side);
  for (const auto& [rs, rl] : r) {
    for (const auto& [cs, cl] : c) total += rect_sum(rs, cs, rl, cl);
  }
  return total;
}

double WindowStats::mean(const Window& w) const {
  const double count = grid_.dim() == 1 ? w.side : static_cast<double>(w.side) * w.side;
  return sum(w) / count;
}

std::vector<double> WindowStats::minima(int side) const {
  return corner_extremes(grid_, values_, side, wrap_, [](double a, double b) { return a < b; });
}

std::vector<double> WindowStats::maxima(int side) const {
  return corner_extremes(grid_, values_, side, wrap_, [](double a, double b) { return a > b; });
}

// --- window maxima ------------------------------------------------------------

namespace {

Window corner_window(const Grid& g, int corners, std::size_t idx, int side) {
  if (g.dim() == 1) return Window{{static_cast<int>(idx), 0}, side};
  return Window{{static_cast<int>(idx / static_cast<std::size_t>(corners)),
                 static_cast<int>(idx % static_cast<std::size_t>(corners))},
                side};
}

std::vector<double> spread_to_points(const Grid& g, const std::vector<double>& corner_vals,
                                     int corners, int side, bool wrap) {
  const int n = g.points_per_axis();
  if (g.dim() == 1) return line_spread_max(corner_vals, n, side, wrap);
  const auto cn = static_cast<std::size_t>(corners);
  const auto nn = static_cast<std::size_t>(n);
  std::vector<double> rows(cn * nn);
  std::vector<double> line(cn);
  for (std::size_t r = 0; r < cn; ++r) {
    for (std::size_t c = 0; c < cn; ++c) line[c] = corner_vals[r * cn + c];
    const auto s = line_spread_max(line, n, side, wrap);
    std::copy(s.begin(), s.end(), rows.begin() + static_cast<long>(r * nn));
  }
  std::vector<double> out(nn * nn);
  for (std::size_t x1 = 0; x1 < nn; ++x1) {
    for (std::size_t r = 0; r < cn; ++r) line[r] = rows[r * nn + x1];
    const auto s = line_spread_max(line, n, side, wrap);
    for (std::size_t x0 = 0; x0 < nn; ++x0) out[x0 * nn + x1] = s[x0];
  }
  return out;
}

std::size_t corner_count(const Grid& g, int corners) {
  const auto c = static_cast<std::size_t>(corners);
  return g.dim() == 1 ? c : c * c;
}

int corners_for(const Grid& g, int side, bool wrap) {
  return wrap ? g.points_per_axis() : g.points_per_axis() - side + 1;
}

}  // namespace

std::vector<double> max_over_windows_containing(const Grid& g, const WindowFamily& W,
                                                const std::function<double(const Window&)>& value) {
  const auto sides = W.sides(g.points_per_axis());
  std::vector<std::vector<double>> per_side(sides.size());
  parallel_for(sides.size(), [&](std::size_t si) {
    const int side = sides[si];
    const int corners = corners_for(g, side, W.wrap);
    std::vector<double> vals(corner_count(g, corners));
    for (std::size_t c = 0; c < vals.size(); ++c) vals[c] = value(corner_window(g, corners, c, side));
    per_side[si] = spread_to_points(g, vals, corners, side, W.wrap);
  });
  std::vector<double> out(g.size(), 0.0);
  for (const auto& v : per_side) {
    for (std::size_t x = 0; x < out.size(); ++x) out[x] = std::max(out[x], v[x]);
  }
  return out;
}

BestWindow best_window_per_side(const Grid& g, const WindowFamily& W,
                                const std::function<CornerValue(int)>& prepare) {
  const auto sides = W.sides(g.points_per_axis());
  std::vector<BestWindow> per_side(sides.size());
  auto better = [](double v, double best) { return v > best || (std::isnan(v) && !std::isnan(best)); };
  parallel_for(sides.size(), [&](std::size_t si) {
    const int side = sides[si];
    const int corners = corners_for(g, side, W.wrap);
    const CornerValue value = prepare(side);
    BestWindow best{-std::numeric_limits<double>::infinity(), {}};
    const std::size_t count = corner_count(g, corners);
    for (std::size_t c = 0; c < count; ++c) {
      const Window w = corner_window(g, corners, c, side);
      const double v = value(w, c);
      if (better(v, best.value)) best = {v, w};
    }
    per_side[si] = best;
  });
  BestWindow best = per_side.front();
  for (const auto& b : per_side) {
    if (better(b.value, best.value)) best = b;
  }
  return best;
}

BestWindow best_window(const Grid& g, const WindowFamily& W,
                       const std::function<double(const Window&)>& value) {
  return best_window_per_side(g, W, [&](int) {
    return CornerValue([&](const Window& w, std::size_t) { return value(w); });
  });
}

// --- operators ------------------------------------------------------------------

namespace {

std::vector<double> powered_magnitudes(const SampledField& f, double p) {
  auto mag = f.magnitudes();
  if (p != 1.0) {
    for (auto& v : mag) v = std::pow(v, p);
  }
  return mag;
}

SampledField nonnegative(const Grid& g, std::vector<double> v) {
  return SampledField::from_real(g, std::move(v), FieldKind::nonnegative_real);
}

void check_delta(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("delta must lie in (0, 1]");
}

}  // namespace

SampledField maximal(const SampledField& f, const WindowFamily& W) {
  const Grid& g = f.grid();
  const WindowStats stats(g, f.magnitudes(), W.wrap);
  return nonnegative(g, max_over_windows_containing(
                            g, W, [&](const Window& w) { return stats.mean(w); }));
}

SampledField multilinear_maximal_p(const std::vector<SampledField>& f, double p0,
                                   const WindowFamily& W) {
  if (f.empty()) throw ConfigError("need at least one input field");
  if (!(p0 >= 1.0) || !std::isfinite(p0)) throw ConfigError("p0 must be a finite real >= 1");
  const Grid& g = f.front().grid();
  std::vector<WindowStats> stats;
  for (const auto& fj : f) {
    if (!(fj.grid() == g)) throw ConfigError("fields live on different grids");
    stats.emplace_back(g, powered_magnitudes(fj, p0), W.wrap);
  }
  const double inv = 1.0 / p0;
  return nonnegative(g, max_over_windows_containing(g, W, [&](const Window& w) {
                       double prod = 1.0;
                       for (const auto& s : stats) {
                         const double m = s.mean(w);
                         if (m == 0.0) return 0.0;
                         prod *= p0 == 1.0 ? m : std::pow(m, inv);
                       }
                       return prod;
                     }));
}

SampledField m_delta(const SampledField& f, double delta, const WindowFamily& W) {
  check_delta(delta);
  const Grid& g = f.grid();
  const WindowStats stats(g, powered_magnitudes(f, delta), W.wrap);
  auto out = max_over_windows_containing(g, W, [&](const Window& w) { return stats.mean(w); });
  if (delta != 1.0) {
    for (auto& v : out) v = std::pow(v, 1.0 / delta);
  }
  return nonnegative(g, std::move(out));
}

SampledField sharp_maximal_delta(const SampledField& f, double delta, const WindowFamily& W) {
  check_delta(delta);
  const Grid& g = f.grid();
  const auto powered = powered_magnitudes(f, delta);
  const WindowStats stats(g, powered, W.wrap);
  auto out = max_over_windows_containing(g, W, [&](const Window& w) {
    if (w.side == 1) return 0.0;
    const double mean = stats.mean(w);
    const auto cells = window_cells(g, w);
    double dev = 0.0;
    for (auto i : cells) dev += std::abs(powered[i] - mean);
    return dev / static_cast<double>(cells.size());
  });
  if (delta != 1.0) {
    for (auto& v : out) v = std::pow(v, 1.0 / delta);
  }
  return nonnegative(g, std::move(out));
}

SampledField orlicz_maximal_slot(const std::vector<SampledField>& f, std::size_t slot, double p0,
                                 const WindowFamily& W) {
  if (slot >= f.size()) throw ConfigError("slot index out of range");
  if (!(p0 >= 1.0) || !std::isfinite(p0)) throw ConfigError("p0 must be a finite real >= 1");
  const Grid& g = f.front().grid();
  std::vector<WindowStats> stats;
  for (const auto& fj : f) {
    if (!(fj.grid() == g)) throw ConfigError("fields live on different grids");
    stats.emplace_back(g, powered_magnitudes(fj, p0), W.wrap);
  }
  const auto target = f[slot].magnitudes();
  const YoungFn Y{YoungKind::phi, p0};
  const double inv = 1.0 / p0;
  return nonnegative(g, max_over_windows_containing(g, W, [&](const Window& w) {
                       double prod = 1.0;
                       for (std::size_t j = 0; j < f.size(); ++j) {
                         if (j == slot) continue;
                         const double m = stats[j].mean(w);
                         if (m == 0.0) return 0.0;
                         prod *= std::pow(m, inv);
                       }
                       if (stats[slot].sum(w) == 0.0) return 0.0;
                       return prod * luxemburg_norm(window_values(g, target, w), Y);
                     }));
}

}  // namespace mslab
