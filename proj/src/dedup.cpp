#include "textcue/dedup.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "textcue/error.hpp"
#include "textcue/io.hpp"

namespace textcue {

EmbeddingSet::EmbeddingSet(std::vector<std::string> ids, std::size_t dim,
                           std::vector<float> vectors)
    : ids_(std::move(ids)), dim_(dim) {
  if (dim == 0) fail(ErrorCode::kDimensionMismatch, "embedding dimension must be positive");
  if (vectors.size() != ids_.size() * dim) {
    fail(ErrorCode::kDimensionMismatch,
         std::to_string(ids_.size()) + " ids but " + std::to_string(vectors.size()) +
             " values for dimension " + std::to_string(dim));
  }
  vectors_.resize(vectors.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    double norm2 = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double v = vectors[i * dim + k];
      if (!std::isfinite(v)) fail(ErrorCode::kValue, "non-finite embedding for " + ids_[i]);
      norm2 += v * v;
    }
    if (!(norm2 > 0.0)) fail(ErrorCode::kZeroVector, "zero embedding for " + ids_[i]);
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t k = 0; k < dim; ++k) vectors_[i * dim + k] = vectors[i * dim + k] * inv;
  }
}

double EmbeddingSet::cosine(std::size_t a, std::size_t b) const {
  const auto va = vector(a);
  const auto vb = vector(b);
  double dot = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) dot += va[k] * vb[k];
  return dot;
}

EmbeddingSet EmbeddingSet::subset(std::span<const std::size_t> rows) const {
  EmbeddingSet out;
  out.dim_ = dim_;
  for (std::size_t r : rows) {
    out.ids_.push_back(ids_.at(r));
    const auto v = vector(r);
    out.vectors_.insert(out.vectors_.end(), v.begin(), v.end());
  }
  return out;
}

EmbeddingSet load_embeddings(const std::filesystem::path& vectors_path,
                             const std::filesystem::path& ids_path) {
  const auto bytes = io::read_binary(vectors_path);
  io::ByteReader in(bytes);
  if (in.bytes(4) != "TCEM") fail(ErrorCode::kFormat, "bad magic, expected TCEM");
  const auto version = in.u16();
  if (version != 1) fail(ErrorCode::kFormat, "unsupported embeddings version " + std::to_string(version));
  const std::size_t n = in.u32();
  const std::size_t dim = in.u32();
  if (in.remaining() != n * dim * sizeof(float)) {
    fail(ErrorCode::kFormat, "embedding payload length does not match N x dim");
  }
  std::vector<float> values(n * dim);
  in.f32_array(values);

  std::vector<std::string> ids;
  for (const auto& [lineno, rec] : io::read_jsonl(ids_path)) {
    if (rec.is_string()) {
      ids.push_back(rec.get<std::string>());
    } else if (rec.is_object() && rec.contains("id")) {
      ids.push_back(rec["id"].is_string() ? rec["id"].get<std::string>() : rec["id"].dump());
    } else {
      fail(ErrorCode::kFormat, ids_path.string() + ":" + std::to_string(lineno) +
                                   ": expected an id string or {\"id\": ...}");
    }
  }
  if (ids.size() != n) {
    fail(ErrorCode::kDimensionMismatch, std::to_string(ids.size()) + " ids for " +
                                            std::to_string(n) + " vectors");
  }
  return EmbeddingSet(std::move(ids), dim, std::move(values));
}

std::vector<std::uint8_t> serialize_embeddings(std::size_t n, std::size_t dim,
                                               std::span<const float> vectors) {
  if (vectors.size() != n * dim) fail(ErrorCode::kDimensionMismatch, "vector count mismatch");
  io::ByteWriter out;
  out.raw("TCEM");
  out.u16(1);
  out.u32(static_cast<std::uint32_t>(n));
  out.u32(static_cast<std::uint32_t>(dim));
  out.f32_array(vectors);
  return out.release();
}

DedupResult dedup(const EmbeddingSet& set, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "threshold must lie in (0, 1]");
  }
  DedupResult res;
  for (std::size_t i = 0; i < set.size(); ++i) {
    bool duplicate = false;
    for (std::size_t g = 0; g < res.kept.size(); ++g) {
      if (set.cosine(i, res.kept[g]) >= threshold) {
        res.groups[g].members.push_back(i);
        duplicate = true;
        break;
      }
    }
    if (!duplicate) {
      res.kept.push_back(i);
      res.groups.push_back({i, {}});
    }
  }
  return res;
}

std::string dedup_json(const EmbeddingSet& set, const DedupResult& result, double threshold) {
  nlohmann::ordered_json j;
  j["threshold"] = threshold;
  j["input_count"] = set.size();
  j["kept_count"] = result.kept.size();
  auto kept = nlohmann::ordered_json::array();
  for (std::size_t r : result.kept) kept.push_back(set.ids()[r]);
  j["kept"] = std::move(kept);
  auto groups = nlohmann::ordered_json::array();
  for (const auto& g : result.groups) {
    if (g.members.empty()) continue;
    nlohmann::ordered_json o;
    o["representative"] = set.ids()[g.representative];
    auto dups = nlohmann::ordered_json::array();
    for (std::size_t m : g.members) dups.push_back(set.ids()[m]);
    o["duplicates"] = std::move(dups);
    groups.push_back(std::move(o));
  }
  j["duplicate_groups"] = std::move(groups);
  return j.dump(2) + "\n";
}

}  // namespace textcue
