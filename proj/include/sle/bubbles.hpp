#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "sle/errors.hpp"
#include "sle/geometry.hpp"
#include "sle/trace.hpp"

namespace sle {

/// Upper half-plane viewing window [x_min, x_max] x [0, y_max].
struct Box {
  double x_min = -8.0;
  double x_max = 8.0;
  double y_max = 8.0;
};

/// Bounded complementary component of (trace union R), classified by which
/// halves of the real axis its closure reaches: (neg, pos) = (F,F) type 0,
/// (F,T) type 1, (T,F) type 2, (T,T) type 3.
struct Bubble {
  std::size_t order_index = 0;  // formation order within the sequence
  int type_code = 0;
  double diameter = 0.0;
  bool touches_negative_axis = false;
  bool touches_positive_axis = false;
  int component_id = 0;  // raster discovery label, for reproducibility
};

struct BubbleSequence {
  std::vector<Bubble> bubbles;          // formation order
  std::optional<std::size_t> anchor;    // first type-3 bubble with diameter >= 1
};

struct IndicatorSequence {
  std::vector<int> bits;                     // one per consecutive type-3 pair
  std::optional<std::size_t> anchor_offset;  // bit index between anchor and its successor
};

namespace detail {

struct RasterGrid {
  double x0 = 0.0, h = 0.0;
  int nx = 0, ny = 0;
  std::vector<std::uint8_t> state;              // 0 free, 1 curve, 2 visited
  std::unordered_map<int, int> curve_time;      // cell -> first painting sample

  int cell(int ix, int iy) const { return iy * nx + ix; }
  double cx(int ix) const { return x0 + (ix + 0.5) * h; }
};

/// Paint the 8-connected Bresenham line between two cells, keeping the
/// earliest painting sample per cell.  An 8-connected barrier is tight for the
/// 4-connected flood fill used below.
inline void paint_line(RasterGrid& g, int x0, int y0, int x1, int y1, int sample) {
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    if (x0 >= 0 && x0 < g.nx && y0 >= 0 && y0 < g.ny) {
      const int c = g.cell(x0, y0);
      g.state[c] = 1;
      auto [it, inserted] = g.curve_time.try_emplace(c, sample);
      if (!inserted && it->second > sample) it->second = sample;
    }
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

/// Liang-Barsky clip of a segment to [xlo,xhi] x [ylo,yhi]; false if disjoint.
inline bool clip_segment(double& ax, double& ay, double& bx, double& by, double xlo, double xhi,
                         double ylo, double yhi) {
  double t0 = 0.0, t1 = 1.0;
  const double dx = bx - ax, dy = by - ay;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {ax - xlo, xhi - ax, ay - ylo, yhi - ay};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
    } else {
      const double r = q[i] / p[i];
      if (p[i] < 0.0) {
        if (r > t1) return false;
        if (r > t0) t0 = r;
      } else {
        if (r < t0) return false;
        if (r < t1) t1 = r;
      }
    }
  }
  const double nax = ax + t0 * dx, nay = ay + t0 * dy;
  bx = ax + t1 * dx;
  by = ay + t1 * dy;
  ax = nax;
  ay = nay;
  return true;
}

struct ComponentStats {
  bool touches_edge = false;
  bool neg = false, pos = false;
  int earliest = std::numeric_limits<int>::max();
  int latest = -1;
  int left_ix = std::numeric_limits<int>::max();
  int left_iy = std::numeric_limits<int>::max();
  std::vector<Complex> extreme_points;
};

}  // namespace detail

/// Extract the bubble decomposition of a finite trace window.
///
/// The trace polyline is rasterized onto a grid of cell size `resolution`,
/// cropped to the trace's bounding box intersected with `box`.  Bounded
/// complementary components (4-connected, with the rasterized curve as
/// barrier) become bubbles; components reaching the left, right or top edge
/// of the window are the unbounded complementary domains and are dropped.
///
/// Axis adjacency: a component reaches the negative axis when it owns a
/// bottom-row cell with center < -resolution, or sits directly above a
/// bottom-row curve cell there (the curve may run along R; the component's
/// closure still meets the axis).  Symmetrically for the positive axis.
///
/// Formation order is the trace sample index that completed the component's
/// boundary (the latest sample adjacent to it), ties broken by leftmost
/// pixel.  Diameters are measured over the component closure (its cells plus
/// adjacent curve cells, at cell-center accuracy).
///
/// Throws resolution_error when the trace's median consecutive-sample gap is
/// below 2*resolution: features at the sampling scale would be lost in the
/// raster.
inline BubbleSequence extract_bubbles(const Trace& tr, const Box& box, double resolution) {
  if (!(resolution > 0.0)) throw std::invalid_argument("extract_bubbles: resolution must be > 0");
  BubbleSequence seq;
  if (tr.points.size() < 2) return seq;
  const double gap = median_sample_gap(tr);
  if (gap < 2.0 * resolution)
    throw resolution_error("extract_bubbles: resolution too coarse for sampling gap " +
                           std::to_string(gap));

  // Crop window: trace bounds padded by a few cells, clamped to the box.
  double min_re = tr.points[0].real(), max_re = min_re, max_im = 0.0;
  for (const auto& p : tr.points) {
    min_re = std::min(min_re, p.real());
    max_re = std::max(max_re, p.real());
    max_im = std::max(max_im, p.imag());
  }
  const double h = resolution;
  const double margin = 4.0 * h;
  const double x0 = std::max(box.x_min, min_re - margin);
  const double x1 = std::min(box.x_max, max_re + margin);
  const double y1 = std::min(box.y_max, max_im + margin);
  if (!(x1 > x0) || !(y1 > 0.0)) return seq;

  detail::RasterGrid g;
  g.x0 = x0;
  g.h = h;
  g.nx = static_cast<int>(std::ceil((x1 - x0) / h)) + 1;
  g.ny = static_cast<int>(std::ceil(y1 / h)) + 1;
  g.state.assign(static_cast<std::size_t>(g.nx) * g.ny, 0);

  for (std::size_t i = 0; i + 1 < tr.points.size(); ++i) {
    double ax = tr.points[i].real(), ay = tr.points[i].imag();
    double bx = tr.points[i + 1].real(), by = tr.points[i + 1].imag();
    if (!detail::clip_segment(ax, ay, bx, by, x0, x0 + g.nx * h, 0.0, g.ny * h)) continue;
    const auto cellx = [&](double x) {
      return std::clamp(static_cast<int>(std::floor((x - x0) / h)), 0, g.nx - 1);
    };
    const auto celly = [&](double y) {
      return std::clamp(static_cast<int>(std::floor(y / h)), 0, g.ny - 1);
    };
    detail::paint_line(g, cellx(ax), celly(ay), cellx(bx), celly(by), static_cast<int>(i));
  }

  // Span-based 4-connected flood fill over free cells, one component at a
  // time; per-column extremes feed the diameter computation.
  std::vector<int> col_min(g.nx), col_max(g.nx), col_gen(g.nx, -1);
  std::vector<int> touched_cols;
  struct Span {
    int x1, x2, y;
  };
  std::vector<Span> stack;

  struct PendingBubble {
    detail::ComponentStats stats;
    double diam;
    int id;
  };
  std::vector<PendingBubble> pending;

  int next_id = 0;
  for (int sy = 0; sy < g.ny; ++sy) {
    for (int sx = 0; sx < g.nx; ++sx) {
      if (g.state[g.cell(sx, sy)] != 0) continue;
      const int id = next_id++;
      detail::ComponentStats st;
      touched_cols.clear();

      const auto note_extreme = [&](int ix, int iy) {
        if (col_gen[ix] != id) {
          col_gen[ix] = id;
          col_min[ix] = iy;
          col_max[ix] = iy;
          touched_cols.push_back(ix);
        } else {
          col_min[ix] = std::min(col_min[ix], iy);
          col_max[ix] = std::max(col_max[ix], iy);
        }
      };
      const auto visit_cell = [&](int ix, int iy) {
        note_extreme(ix, iy);
        if (ix == 0 || ix == g.nx - 1 || iy == g.ny - 1) st.touches_edge = true;
        if (ix < st.left_ix || (ix == st.left_ix && iy < st.left_iy)) {
          st.left_ix = ix;
          st.left_iy = iy;
        }
        const double c = g.cx(ix);
        if (iy == 0) {
          if (c < -h) st.neg = true;
          if (c > h) st.pos = true;
        }
        // Neighbors: curve contact times, closure extremes, axis-through-curve.
        const int nbr[4][2] = {{ix - 1, iy}, {ix + 1, iy}, {ix, iy - 1}, {ix, iy + 1}};
        for (const auto& nb : nbr) {
          if (nb[0] < 0 || nb[0] >= g.nx || nb[1] < 0 || nb[1] >= g.ny) continue;
          if (g.state[g.cell(nb[0], nb[1])] == 1) {
            note_extreme(nb[0], nb[1]);
            const auto it = g.curve_time.find(g.cell(nb[0], nb[1]));
            if (it != g.curve_time.end()) {
              st.earliest = std::min(st.earliest, it->second);
              st.latest = std::max(st.latest, it->second);
            }
            if (nb[1] == 0 && iy == 1 && nb[0] == ix) {
              if (c < -h) st.neg = true;
              if (c > h) st.pos = true;
            }
          }
        }
      };

      stack.clear();
      stack.push_back({sx, sx, sy});
      g.state[g.cell(sx, sy)] = 2;
      visit_cell(sx, sy);
      while (!stack.empty()) {
        auto [x1s, x2s, y] = stack.back();
        stack.pop_back();
        int lx = x1s;
        while (lx - 1 >= 0 && g.state[g.cell(lx - 1, y)] == 0) {
          --lx;
          g.state[g.cell(lx, y)] = 2;
          visit_cell(lx, y);
        }
        int rx = x2s;
        while (rx + 1 < g.nx && g.state[g.cell(rx + 1, y)] == 0) {
          ++rx;
          g.state[g.cell(rx, y)] = 2;
          visit_cell(rx, y);
        }
        for (const int ny2 : {y - 1, y + 1}) {
          if (ny2 < 0 || ny2 >= g.ny) continue;
          int x = lx;
          while (x <= rx) {
            if (g.state[g.cell(x, ny2)] == 0) {
              const int run = x;
              while (x <= rx && g.state[g.cell(x, ny2)] == 0) {
                g.state[g.cell(x, ny2)] = 2;
                visit_cell(x, ny2);
                ++x;
              }
              stack.push_back({run, x - 1, ny2});
            } else {
              ++x;
            }
          }
        }
      }

      if (st.touches_edge) continue;
      st.extreme_points.reserve(2 * touched_cols.size());
      for (const int ix : touched_cols) {
        st.extreme_points.emplace_back(g.cx(ix), (col_min[ix] + 0.5) * h);
        if (col_max[ix] != col_min[ix])
          st.extreme_points.emplace_back(g.cx(ix), (col_max[ix] + 0.5) * h);
      }
      const double diam = st.extreme_points.empty() ? 0.0 : diameter(st.extreme_points);
      pending.push_back({std::move(st), diam, id});
    }
  }

  std::sort(pending.begin(), pending.end(), [](const PendingBubble& a, const PendingBubble& b) {
    if (a.stats.latest != b.stats.latest) return a.stats.latest < b.stats.latest;
    if (a.stats.left_ix != b.stats.left_ix) return a.stats.left_ix < b.stats.left_ix;
    if (a.stats.left_iy != b.stats.left_iy) return a.stats.left_iy < b.stats.left_iy;
    return a.id < b.id;
  });

  seq.bubbles.reserve(pending.size());
  for (std::size_t i = 0; i < pending.size(); ++i) {
    const auto& p = pending[i];
    Bubble b;
    b.order_index = i;
    b.touches_negative_axis = p.stats.neg;
    b.touches_positive_axis = p.stats.pos;
    b.type_code = (p.stats.neg ? 2 : 0) + (p.stats.pos ? 1 : 0);
    b.diameter = p.diam;
    b.component_id = p.id;
    seq.bubbles.push_back(b);
    if (!seq.anchor && b.type_code == 3 && b.diameter >= 1.0) seq.anchor = i;
  }
  return seq;
}

/// The 0/1 sequence between consecutive type-3 bubbles: bit i is 1 iff a
/// type-1 or type-2 bubble forms between type-3 bubbles i and i+1 (type-0
/// bubbles do not count).  Requires at least two type-3 bubbles.
inline IndicatorSequence indicator_sequence(const BubbleSequence& bs) {
  std::vector<std::size_t> t3;
  for (std::size_t i = 0; i < bs.bubbles.size(); ++i)
    if (bs.bubbles[i].type_code == 3) t3.push_back(i);
  if (t3.size() < 2)
    throw insufficient_data_error("indicator_sequence: fewer than two type-3 bubbles");
  IndicatorSequence out;
  out.bits.reserve(t3.size() - 1);
  for (std::size_t k = 0; k + 1 < t3.size(); ++k) {
    int bit = 0;
    for (std::size_t i = t3[k] + 1; i < t3[k + 1]; ++i) {
      const int tc = bs.bubbles[i].type_code;
      if (tc == 1 || tc == 2) {
        bit = 1;
        break;
      }
    }
    out.bits.push_back(bit);
  }
  if (bs.anchor) {
    const auto pos = std::lower_bound(t3.begin(), t3.end(), *bs.anchor);
    if (pos != t3.end() && *pos == *bs.anchor) {
      const auto off = static_cast<std::size_t>(pos - t3.begin());
      if (off < out.bits.size()) out.anchor_offset = off;
    }
  }
  return out;
}

/// Index (into the formation-ordered bubble list) of the n-th type-3 bubble
/// with Euclidean diameter at least r.
inline std::size_t k_r_n(const BubbleSequence& bs, double r, std::size_t n) {
  if (!(r > 0.0)) throw std::invalid_argument("k_r_n: r must be > 0");
  if (n < 1) throw std::invalid_argument("k_r_n: n must be >= 1");
  std::size_t found = 0;
  for (std::size_t i = 0; i < bs.bubbles.size(); ++i) {
    if (bs.bubbles[i].type_code == 3 && bs.bubbles[i].diameter >= r) {
      if (++found == n) return i;
    }
  }
  throw not_found_error("k_r_n: fewer than n type-3 bubbles of diameter >= r");
}

}  // namespace sle
