#include "textcue/crop_pipeline.hpp"

#include <nlohmann/json.hpp>

namespace textcue {

using ojson = nlohmann::ordered_json;

CropResult run_crop_pipeline(const AttentionDump& dump,
                             const std::optional<std::vector<WordBox>>& words,
                             const CropOptions& options) {
  CropResult r;
  r.options = options;
  r.geometry = dump.geometry;

  const auto stack = relative_attention(dump, options.epsilon);
  r.selection = select_salient_layer(stack, options.layer_start, options.layer_count);
  const auto grid = reshape_to_grid(stack, r.selection, dump);
  const auto specs = window_set(dump.geometry);
  const auto candidates = search_windows(grid, specs);
  r.windows = select_best_window(grid, candidates);

  const auto& best = r.windows.scored[r.windows.index].candidate;
  r.rough = grid_to_pixels(best.placement.row, best.placement.col, best.spec, dump.geometry);

  const double img_w = dump.geometry.orig_w;
  const double img_h = dump.geometry.orig_h;
  r.words_provided = words.has_value();
  if (words) {
    r.word_count = words->size();
    r.refinement = refine_box(r.rough, *words, img_w, img_h);
    for (std::size_t src : r.refinement.contributing) {
      for (const auto& w : *words) {
        if (w.source_index == src) r.contributing_confidence.push_back(w.confidence);
      }
    }
  } else {
    r.refinement = {r.rough, {}, true};
  }
  r.plan = make_crop_plan(r.rough, r.refinement.box, options.enlarge);
  return r;
}

namespace {

ojson box_json(const BoxPx& b) { return ojson::array({b.x0, b.y0, b.x1, b.y1}); }

}  // namespace

std::string crop_result_json(const CropResult& r, const std::string& metadata) {
  ojson j;
  j["rough"] = box_json(r.plan.rough);
  j["refined"] = box_json(r.plan.refined);
  j["enlarge"] = r.plan.enlarge;
  j["out_w"] = r.plan.out_w;
  j["out_h"] = r.plan.out_h;
  j["refinement"] = r.refinement.fallback ? "fallback" : "words";
  j["words_file"] = r.words_provided;
  j["word_count"] = r.word_count;
  j["contributing_words"] = r.refinement.contributing;
  ojson conf = ojson::array();
  for (const auto& c : r.contributing_confidence) {
    conf.push_back(c ? ojson(*c) : ojson(nullptr));
  }
  j["contributing_confidence"] = std::move(conf);

  ojson layer;
  layer["window_start"] = r.selection.window_start;
  layer["window_len"] = r.selection.window_len;
  layer["divergences"] = r.selection.divergences;
  layer["chosen"] = r.selection.chosen;
  j["layer_selection"] = layer;

  ojson cands = ojson::array();
  for (const auto& s : r.windows.scored) {
    ojson c;
    c["height_px"] = s.candidate.spec.height_px;
    c["aspect"] = s.candidate.spec.aspect;
    c["height_cells"] = s.candidate.spec.height_cells;
    c["width_cells"] = s.candidate.spec.width_cells;
    c["row"] = s.candidate.placement.row;
    c["col"] = s.candidate.placement.col;
    c["inner_sum"] = s.candidate.placement.inner_sum;
    c["neighbor_count"] = s.neighbor_count;
    c["neighbor_mean"] = s.neighbor_mean;
    c["deviation"] = s.deviation;
    cands.push_back(std::move(c));
  }
  j["window_choice"] = r.windows.index;
  j["candidates"] = std::move(cands);

  const Geometry& g = r.geometry;
  j["geometry"] = {{"grid_h", g.grid_h}, {"grid_w", g.grid_w}, {"patch_px", g.patch_px},
                   {"proc_w", g.proc_w}, {"proc_h", g.proc_h}, {"orig_w", g.orig_w},
                   {"orig_h", g.orig_h}};
  j["options"] = {{"layer_start", r.options.layer_start},
                  {"layer_count", r.options.layer_count},
                  {"epsilon", r.options.epsilon},
                  {"enlarge", r.options.enlarge}};
  j["metadata"] = metadata;
  return j.dump(2) + "\n";
}

}  // namespace textcue
