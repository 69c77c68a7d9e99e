#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "textcue/geometry.hpp"

namespace textcue {

inline constexpr double kDefaultEnlarge = 1.5;

struct WordBox {
  BoxPx box;
  std::optional<double> confidence;  // carried through, never used for selection
  std::size_t source_index = 0;      // record position in the words file
};

/// Reads word boxes from JSON Lines ({"box":[x0,y0,x1,y1],"conf":c}). Boxes are
/// clipped to the image; boxes with zero area are dropped with a warning.
std::vector<WordBox> load_word_boxes(const std::filesystem::path& path,
                                     double image_w, double image_h);

double iou(const BoxPx& a, const BoxPx& b);

struct Refinement {
  BoxPx box;
  std::vector<std::size_t> contributing;  // source_index of each selected word
  bool fallback = true;                   // no word overlapped the rough box
};

/// Minimum bounding rectangle of every word box with positive IoU against
/// the rough box, clipped to the image. Falls back to the rough box when no
/// word overlaps it.
Refinement refine_box(const BoxPx& rough, std::span<const WordBox> words,
                      double image_w, double image_h);

struct CropPlan {
  BoxPx rough;
  BoxPx refined;
  double enlarge = kDefaultEnlarge;
  long out_w = 0;
  long out_h = 0;
};

// Throws Error{kDegenerateBox} when the refined box has no area.
CropPlan make_crop_plan(const BoxPx& rough, const BoxPx& refined,
                        double enlarge = kDefaultEnlarge);

}  // namespace textcue
