#include "textcue/box_refine.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <spdlog/spdlog.h>

#include "textcue/error.hpp"
#include "textcue/io.hpp"

namespace textcue {

std::vector<WordBox> load_word_boxes(const std::filesystem::path& path,
                                     double image_w, double image_h) {
  std::vector<WordBox> words;
  std::size_t index = 0;
  for (const auto& [lineno, rec] : io::read_jsonl(path)) {
    const std::size_t source = index++;
    const auto where = path.string() + ":" + std::to_string(lineno);
    if (!rec.is_object() || !rec.contains("box") || !rec["box"].is_array() ||
        rec["box"].size() != 4) {
      fail(ErrorCode::kFormat, where + ": expected {\"box\":[x0,y0,x1,y1]}");
    }
    BoxPx b;
    try {
      b = {rec["box"][0].get<double>(), rec["box"][1].get<double>(),
           rec["box"][2].get<double>(), rec["box"][3].get<double>()};
    } catch (const nlohmann::json::exception&) {
      fail(ErrorCode::kFormat, where + ": box coordinates must be numbers");
    }
    if (!std::isfinite(b.x0) || !std::isfinite(b.y0) || !std::isfinite(b.x1) ||
        !std::isfinite(b.y1)) {
      fail(ErrorCode::kValue, where + ": non-finite coordinate");
    }
    WordBox w;
    w.box = clip_box(b, image_w, image_h);
    w.source_index = source;
    if (rec.contains("conf") && !rec["conf"].is_null()) {
      if (!rec["conf"].is_number()) fail(ErrorCode::kFormat, where + ": conf must be a number");
      w.confidence = rec["conf"].get<double>();
    }
    if (!w.box.valid()) {
      spdlog::warn("{}: dropping word box with zero area", where);
      continue;
    }
    words.push_back(w);
  }
  return words;
}

double iou(const BoxPx& a, const BoxPx& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? std::min(1.0, inter / uni) : 0.0;
}

Refinement refine_box(const BoxPx& rough, std::span<const WordBox> words,
                      double image_w, double image_h) {
  Refinement out;
  constexpr double inf = std::numeric_limits<double>::infinity();
  BoxPx mbr{inf, inf, -inf, -inf};
  for (const auto& w : words) {
    if (!(iou(rough, w.box) > 0.0)) continue;
    mbr.x0 = std::min(mbr.x0, w.box.x0);
    mbr.y0 = std::min(mbr.y0, w.box.y0);
    mbr.x1 = std::max(mbr.x1, w.box.x1);
    mbr.y1 = std::max(mbr.y1, w.box.y1);
    out.contributing.push_back(w.source_index);
  }
  if (out.contributing.empty()) {
    out.box = rough;
    out.fallback = true;
  } else {
    out.box = clip_box(mbr, image_w, image_h);
    out.fallback = false;
  }
  return out;
}

CropPlan make_crop_plan(const BoxPx& rough, const BoxPx& refined, double enlarge) {
  if (!(enlarge > 0.0) || !std::isfinite(enlarge)) {
    fail(ErrorCode::kInvalidArgument, "enlarge factor must be positive");
  }
  if (!refined.valid()) fail(ErrorCode::kDegenerateBox, "refined box has zero area");
  CropPlan plan{rough, refined, enlarge, std::lround(enlarge * refined.width()),
                std::lround(enlarge * refined.height())};
  if (plan.out_w < 1 || plan.out_h < 1) {
    fail(ErrorCode::kDegenerateBox, "enlarged crop is smaller than one pixel");
  }
  return plan;
}

}  // namespace textcue
