#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "textcue/attention.hpp"
#include "textcue/geometry.hpp"

namespace textcue {

/// One relative-attention map laid out on the patch grid, row-major.
class SaliencyGrid {
 public:
  SaliencyGrid() = default;
  SaliencyGrid(std::size_t rows, std::size_t cols, std::vector<double> values,
               Geometry geometry);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const Geometry& geometry() const { return geometry_; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  std::span<const double> values() const { return values_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
  Geometry geometry_;
};

SaliencyGrid reshape_to_grid(const RelativeAttentionStack& stack,
                             const LayerSelection& selection,
                             const AttentionDump& dump);

/// Sliding-window shape. height_px/aspect record the first (height, aspect)
/// pair that produced this cell shape.
struct WindowSpec {
  double height_px = 0.0;
  double aspect = 1.0;
  std::size_t height_cells = 0;
  std::size_t width_cells = 0;

  std::size_t area() const { return height_cells * width_cells; }
};

inline constexpr double kWindowBasePx = 224.0;
inline constexpr double kHeightMultipliers[] = {1.0, 1.2, 1.4, 1.6, 1.8, 2.0};
inline constexpr double kAspectRatios[] = {1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};

/// Heights (224 px x multiplier) crossed with aspects (width = height x aspect),
/// converted to processed-image cells, clamped to the grid, de-duplicated in
/// generation order (heights outer, aspects inner).
std::vector<WindowSpec> window_set(const Geometry& geometry);

/// Summed-area table over a grid, accumulated in double precision.
class PrefixSum2D {
 public:
  explicit PrefixSum2D(const SaliencyGrid& grid);

  // Sum over rows [row, row+h) x cols [col, col+w).
  double sum(std::size_t row, std::size_t col, std::size_t h, std::size_t w) const {
    const std::size_t stride = cols_ + 1;
    const std::size_t r1 = row + h;
    const std::size_t c1 = col + w;
    return table_[r1 * stride + c1] - table_[row * stride + c1] -
           table_[r1 * stride + col] + table_[row * stride + col];
  }

 private:
  std::size_t cols_ = 0;
  std::vector<double> table_;
};

struct Placement {
  std::size_t row = 0;
  std::size_t col = 0;
  double inner_sum = 0.0;
};

/// Top-left placement that maximizes the window's inner sum. Ties (within a
/// 1e-12 relative band) go to the smallest row, then the smallest column.
Placement best_position(const PrefixSum2D& sums, std::size_t grid_rows,
                        std::size_t grid_cols, const WindowSpec& spec);
Placement best_position(const SaliencyGrid& grid, const WindowSpec& spec);

struct WindowCandidate {
  WindowSpec spec;
  Placement placement;
};

struct ScoredCandidate {
  WindowCandidate candidate;
  double neighbor_mean = 0.0;
  std::size_t neighbor_count = 0;
  double deviation = 0.0;
};

/// Inner sum minus the mean inner sum of the in-grid placements offset by one
/// cell in each of the 8 compass directions. A window with no in-grid
/// neighbor has deviation 0.
ScoredCandidate score_candidate(const PrefixSum2D& sums, std::size_t grid_rows,
                                std::size_t grid_cols, const WindowCandidate& cand);

struct WindowChoice {
  std::size_t index = 0;  // into the candidate list
  std::vector<ScoredCandidate> scored;
};

/// Argmax of deviation; ties go to the smaller window area, then list order.
WindowChoice select_best_window(const SaliencyGrid& grid,
                                std::span<const WindowCandidate> candidates);

/// best_position for every spec, in spec order.
std::vector<WindowCandidate> search_windows(const SaliencyGrid& grid,
                                            std::span<const WindowSpec> specs);

/// Maps a grid placement to original-image pixels, clipped to the image.
BoxPx grid_to_pixels(std::size_t row, std::size_t col, const WindowSpec& spec,
                     const Geometry& geometry);

}  // namespace textcue
