#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "textcue/attention.hpp"
#include "textcue/box_refine.hpp"
#include "textcue/crop_search.hpp"

namespace textcue {

struct CropOptions {
  std::size_t layer_start = kDefaultLayerStart;
  std::size_t layer_count = kDefaultLayerCount;
  double epsilon = kDefaultEpsilon;
  double enlarge = kDefaultEnlarge;
};

/// Every intermediate decision of one crop run, kept so that layer-window and
/// magnification sweeps can be replayed from the plan alone.
struct CropResult {
  CropOptions options;
  Geometry geometry;
  LayerSelection selection;
  WindowChoice windows;
  BoxPx rough;
  bool words_provided = false;
  std::size_t word_count = 0;
  Refinement refinement;
  std::vector<std::optional<double>> contributing_confidence;
  CropPlan plan;
};

// words == nullopt means no words file; refinement then falls back.
CropResult run_crop_pipeline(const AttentionDump& dump,
                             const std::optional<std::vector<WordBox>>& words,
                             const CropOptions& options = {});

/// Stable, pretty-printed JSON rendering of a crop result.
std::string crop_result_json(const CropResult& result, const std::string& metadata = {});

}  // namespace textcue
