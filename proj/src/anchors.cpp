#include "tical/anchors.hpp"

#include <algorithm>
#include <limits>

#include "tical/errors.hpp"

namespace tical {

std::string_view modality_tag(Modality m) {
  switch (m) {
    case Modality::kLanguage: return "l";
    case Modality::kVisual: return "v";
    case Modality::kAcoustic: return "a";
  }
  return "?";
}

AnchorList::AnchorList(Modality modality, AnchorOptions options)
    : modality_(modality), options_(options) {
  if (options_.capacity == 0) throw InvalidSpec("anchor list capacity must be positive");
  if (options_.balanced) {
    if (options_.n_classes == 0) throw InvalidSpec("balanced anchor list needs n_classes");
    if (options_.capacity < options_.n_classes)
      throw InvalidSpec("balanced anchor list needs capacity >= n_classes");
  }
  per_class_.assign(options_.n_classes, 0);
}

bool AnchorList::try_admit(const BallPoint& feature, std::size_t true_label,
                           std::size_t predicted_label, double confidence, double theta) {
  if (predicted_label != true_label || !(confidence > theta)) return false;
  if (options_.balanced) {
    if (true_label >= options_.n_classes) throw InvalidInput("anchor label out of range");
    const std::size_t quota = options_.capacity / options_.n_classes;
    if (per_class_[true_label] >= quota) {
      auto it = std::find_if(entries_.begin(), entries_.end(),
                             [&](const AnchorEntry& e) { return e.label == true_label; });
      entries_.erase(it);
      --per_class_[true_label];
    }
    ++per_class_[true_label];
  } else if (entries_.size() >= options_.capacity) {
    entries_.pop_front();
  }
  entries_.push_back({feature, true_label, next_seq_++});
  return true;
}

NearestAnchor AnchorList::nearest(std::span<const double> feature) const {
  if (entries_.empty())
    throw NotReady("anchor list for modality '" + std::string(modality_tag(modality_)) + "' is empty");
  NearestAnchor best{std::numeric_limits<double>::infinity(), 0};
  for (const auto& e : entries_) {
    const double d = distance(options_.distance, feature, e.feature.coords());
    if (d < best.distance) best = {d, e.label};
  }
  return best;
}

void AnchorList::restore(std::vector<AnchorEntry> entries, std::uint64_t next_seq) {
  if (entries.size() > options_.capacity) throw InvalidInput("restored anchors exceed capacity");
  std::fill(per_class_.begin(), per_class_.end(), 0);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i > 0 && entries[i].seq <= entries[i - 1].seq)
      throw InvalidInput("restored anchors are not in increasing seq order");
    if (entries[i].seq >= next_seq) throw InvalidInput("restored anchor seq beyond next_seq");
    if (options_.balanced) ++per_class_.at(entries[i].label);
  }
  entries_.assign(std::make_move_iterator(entries.begin()), std::make_move_iterator(entries.end()));
  next_seq_ = next_seq;
}

}  // namespace tical
