#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace textcue {

inline constexpr double kDefaultDedupThreshold = 0.95;

/// Unit-normalized context embeddings with their ids.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  // Normalizes every row. Throws kDimensionMismatch / kZeroVector.
  EmbeddingSet(std::vector<std::string> ids, std::size_t dim, std::vector<float> vectors);

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const double> vector(std::size_t i) const {
    return {vectors_.data() + i * dim_, dim_};
  }

  double cosine(std::size_t a, std::size_t b) const;

  EmbeddingSet subset(std::span<const std::size_t> rows) const;

 private:
  std::vector<std::string> ids_;
  std::size_t dim_ = 0;
  std::vector<double> vectors_;
};

/// TCEM layout (little-endian): "TCEM" u16 version=1, u32 N, u32 dim,
/// f32[N*dim]. Ids come from a JSON Lines sidecar, one per line, either a
/// bare string or {"id": ...}.
EmbeddingSet load_embeddings(const std::filesystem::path& vectors,
                             const std::filesystem::path& ids);
std::vector<std::uint8_t> serialize_embeddings(std::size_t n, std::size_t dim,
                                               std::span<const float> vectors);

struct DuplicateGroup {
  std::size_t representative = 0;   // row index of the kept item
  std::vector<std::size_t> members;  // rows folded into it, input order
};

struct DedupResult {
  std::vector<std::size_t> kept;      // row indices, input order
  std::vector<DuplicateGroup> groups; // one per kept row
};

/// Greedy scan in input order: a row is a duplicate when its cosine
/// similarity to some already-kept row is >= threshold; it joins the first
/// such row's group.
DedupResult dedup(const EmbeddingSet& set, double threshold = kDefaultDedupThreshold);

std::string dedup_json(const EmbeddingSet& set, const DedupResult& result, double threshold);

}  // namespace textcue
