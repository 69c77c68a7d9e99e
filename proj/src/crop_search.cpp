#include "textcue/crop_search.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "textcue/error.hpp"

namespace textcue {

namespace {

// a beats b by more than floating-point noise.
bool clearly_greater(double a, double b) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return a > b + 1e-12 * scale;
}

}  // namespace

SaliencyGrid::SaliencyGrid(std::size_t rows, std::size_t cols,
                           std::vector<double> values, Geometry geometry)
    : rows_(rows), cols_(cols), values_(std::move(values)), geometry_(geometry) {
  if (rows == 0 || cols == 0 || values_.size() != rows * cols) {
    fail(ErrorCode::kShape, "grid values do not match " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
}

SaliencyGrid reshape_to_grid(const RelativeAttentionStack& stack,
                             const LayerSelection& selection,
                             const AttentionDump& dump) {
  if (selection.chosen >= stack.layers) {
    fail(ErrorCode::kShape, "selected layer " + std::to_string(selection.chosen) +
                                " out of range");
  }
  const Geometry& g = dump.geometry;
  if (static_cast<std::size_t>(g.grid_h) * g.grid_w != stack.tokens) {
    fail(ErrorCode::kShape, "grid does not match attention map length");
  }
  auto row = stack.row(selection.chosen);
  return SaliencyGrid(g.grid_h, g.grid_w, std::vector<double>(row.begin(), row.end()), g);
}

std::vector<WindowSpec> window_set(const Geometry& geometry) {
  // Window sizes are measured in processed-image pixels, so one cell is one
  // patch.
  const double patch = geometry.patch_px;
  auto to_cells = [&](double px, std::size_t limit) {
    const long cells = std::lround(px / patch);
    return static_cast<std::size_t>(
        std::clamp<long>(cells, 1, static_cast<long>(limit)));
  };

  std::vector<WindowSpec> specs;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (double mult : kHeightMultipliers) {
    const double height_px = kWindowBasePx * mult;
    for (double aspect : kAspectRatios) {
      WindowSpec spec;
      spec.height_px = height_px;
      spec.aspect = aspect;
      spec.height_cells = to_cells(height_px, geometry.grid_h);
      spec.width_cells = to_cells(height_px * aspect, geometry.grid_w);
      if (seen.emplace(spec.height_cells, spec.width_cells).second) {
        specs.push_back(spec);
      }
    }
  }
  return specs;
}

PrefixSum2D::PrefixSum2D(const SaliencyGrid& grid) : cols_(grid.cols()) {
  const std::size_t rows = grid.rows();
  const std::size_t stride = cols_ + 1;
  table_.assign((rows + 1) * stride, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double row_sum = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) {
      row_sum += grid.at(r, c);
      table_[(r + 1) * stride + (c + 1)] = table_[r * stride + (c + 1)] + row_sum;
    }
  }
}

Placement best_position(const PrefixSum2D& sums, std::size_t grid_rows,
                        std::size_t grid_cols, const WindowSpec& spec) {
  const std::size_t h = std::min(spec.height_cells, grid_rows);
  const std::size_t w = std::min(spec.width_cells, grid_cols);
  if (h == 0 || w == 0) fail(ErrorCode::kShape, "window must span at least one cell");
  Placement best{0, 0, sums.sum(0, 0, h, w)};
  for (std::size_t r = 0; r + h <= grid_rows; ++r) {
    for (std::size_t c = 0; c + w <= grid_cols; ++c) {
      const double s = sums.sum(r, c, h, w);
      if (clearly_greater(s, best.inner_sum)) best = {r, c, s};
    }
  }
  return best;
}

Placement best_position(const SaliencyGrid& grid, const WindowSpec& spec) {
  return best_position(PrefixSum2D(grid), grid.rows(), grid.cols(), spec);
}

ScoredCandidate score_candidate(const PrefixSum2D& sums, std::size_t grid_rows,
                                std::size_t grid_cols, const WindowCandidate& cand) {
  const std::size_t h = std::min(cand.spec.height_cells, grid_rows);
  const std::size_t w = std::min(cand.spec.width_cells, grid_cols);
  const long max_row = static_cast<long>(grid_rows - h);
  const long max_col = static_cast<long>(grid_cols - w);
  const long r0 = static_cast<long>(cand.placement.row);
  const long c0 = static_cast<long>(cand.placement.col);

  ScoredCandidate out{cand, 0.0, 0, 0.0};
  double total = 0.0;
  for (long dr = -1; dr <= 1; ++dr) {
    for (long dc = -1; dc <= 1; ++dc) {
      if (dr == 0 && dc == 0) continue;
      const long r = r0 + dr;
      const long c = c0 + dc;
      if (r < 0 || c < 0 || r > max_row || c > max_col) continue;
      total += sums.sum(static_cast<std::size_t>(r), static_cast<std::size_t>(c), h, w);
      ++out.neighbor_count;
    }
  }
  if (out.neighbor_count > 0) {
    out.neighbor_mean = total / static_cast<double>(out.neighbor_count);
    out.deviation = cand.placement.inner_sum - out.neighbor_mean;
  }
  return out;
}

WindowChoice select_best_window(const SaliencyGrid& grid,
                                std::span<const WindowCandidate> candidates) {
  if (candidates.empty()) fail(ErrorCode::kEmptyInput, "no window candidates");
  const PrefixSum2D sums(grid);
  WindowChoice choice;
  choice.scored.reserve(candidates.size());
  for (const auto& cand : candidates) {
    choice.scored.push_back(score_candidate(sums, grid.rows(), grid.cols(), cand));
  }
  for (std::size_t i = 1; i < choice.scored.size(); ++i) {
    const auto& cur = choice.scored[i];
    const auto& best = choice.scored[choice.index];
    if (clearly_greater(cur.deviation, best.deviation)) {
      choice.index = i;
    } else if (!clearly_greater(best.deviation, cur.deviation) &&
               cur.candidate.spec.area() < best.candidate.spec.area()) {
      choice.index = i;
    }
  }
  return choice;
}

std::vector<WindowCandidate> search_windows(const SaliencyGrid& grid,
                                            std::span<const WindowSpec> specs) {
  const PrefixSum2D sums(grid);
  std::vector<WindowCandidate> out;
  out.reserve(specs.size());
  for (const auto& spec : specs) {
    out.push_back({spec, best_position(sums, grid.rows(), grid.cols(), spec)});
  }
  return out;
}

BoxPx grid_to_pixels(std::size_t row, std::size_t col, const WindowSpec& spec,
                     const Geometry& geometry) {
  const double sx = static_cast<double>(geometry.orig_w) / geometry.proc_w;
  const double sy = static_cast<double>(geometry.orig_h) / geometry.proc_h;
  const double patch = geometry.patch_px;
  const BoxPx raw{static_cast<double>(col) * patch * sx,
                  static_cast<double>(row) * patch * sy,
                  static_cast<double>(col + spec.width_cells) * patch * sx,
                  static_cast<double>(row + spec.height_cells) * patch * sy};
  return clip_box(raw, geometry.orig_w, geometry.orig_h);
}

}  // namespace textcue
