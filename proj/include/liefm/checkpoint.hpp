#pragma once

#include <filesystem>
#include <string>

#include "liefm/groups.hpp"
#include "liefm/mlp.hpp"

namespace liefm {

/**
 * Trained network plus the metadata needed to use it safely.
 *
 * Stored as JSON:
 *   { "format": "liefm-checkpoint", "version": 1, "group": "se2",
 *     "feature_encoding": "se2-xy-cos-sin", "activation": "silu",
 *     "layers": [ { "rows": r, "cols": c, "weight": [row-major r*c],
 *                   "bias": [r] }, ... ] }
 */
struct Checkpoint {
  static constexpr int kVersion = 1;

  std::string group;
  std::string feature_encoding;
  VectorFieldNet net;

  static Checkpoint for_group(const Group& group, VectorFieldNet net);

  /// Throws UsageError if the checkpoint was written for a different group
  /// or encoding, or if the layer shapes do not fit the group.
  void check_compatible(const Group& group) const;
};

std::string checkpoint_to_json(const Checkpoint& checkpoint);
/// Throws ParseError on malformed content or an unsupported version.
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace liefm
