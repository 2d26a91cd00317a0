#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <string_view>
#include <vector>

#include "tical/ballgeom.hpp"

namespace tical {

enum class Modality : std::uint8_t { kLanguage = 0, kVisual = 1, kAcoustic = 2 };
inline constexpr std::array<Modality, 3> kModalities{Modality::kLanguage, Modality::kVisual,
                                                     Modality::kAcoustic};
std::string_view modality_tag(Modality m);  // "l", "v", "a"

struct AnchorEntry {
  BallPoint feature;
  std::size_t label = 0;
  std::uint64_t seq = 0;
};

struct AnchorOptions {
  std::size_t capacity = 128;
  std::size_t min_fill = 8;
  // Per-class sub-queues of capacity / n_classes each, so rare classes keep anchors.
  bool balanced = false;
  std::size_t n_classes = 0;  // required when balanced
  DistanceKind distance = DistanceKind::kHyperbolic;
};

struct NearestAnchor {
  double distance = 0.0;
  std::size_t label = 0;
};

// Fixed-capacity FIFO of confidently, correctly predicted (feature, label) pairs
// for one modality. Entries are stored in increasing `seq` order.
class AnchorList {
 public:
  AnchorList(Modality modality, AnchorOptions options);

  // Admits iff predicted == true label and confidence > theta (strictly).
  // When full, the oldest entry (of the same class in balanced mode) is evicted first.
  bool try_admit(const BallPoint& feature, std::size_t true_label, std::size_t predicted_label,
                 double confidence, double theta);

  // Minimum distance to any stored anchor; ties go to the oldest anchor.
  // Throws NotReady if the list is empty.
  NearestAnchor nearest(std::span<const double> feature) const;
  NearestAnchor nearest(const BallPoint& feature) const { return nearest(feature.coords()); }

  bool is_ready() const { return entries_.size() >= options_.min_fill; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return options_.capacity; }
  Modality modality() const { return modality_; }
  const AnchorOptions& options() const { return options_; }
  const std::deque<AnchorEntry>& entries() const { return entries_; }
  std::uint64_t next_seq() const { return next_seq_; }

  // Replaces the contents (checkpoint restore). Validates ordering and capacity.
  void restore(std::vector<AnchorEntry> entries, std::uint64_t next_seq);

 private:
  Modality modality_;
  AnchorOptions options_;
  std::deque<AnchorEntry> entries_;
  std::vector<std::size_t> per_class_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace tical
