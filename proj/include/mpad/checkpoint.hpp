#pragma once

#include <string>

#include "mpad/svdd.hpp"

namespace mpad::io {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointMeta {
  std::uint64_t training_seed = 0;
  std::string dataset_fingerprint;
  std::string config_hash;
};

// Container: 8-byte magic, little-endian u64 manifest length, JSON manifest
// (format version, NetSpec, fusion tag, sphere, hyperparameters, meta,
// per-tensor shape/offset/byte-length/crc32), then raw little-endian f32
// blobs.
//
// Saving quantizes the in-memory model to checkpoint precision first, so a
// model scores identically before and after a save/load round trip and
// re-saving reproduces byte-identical blobs.
void save_checkpoint(svdd::SvddModel& model, const std::string& path,
                     const CheckpointMeta& meta = {});

struct LoadedCheckpoint {
  svdd::SvddModel model;
  CheckpointMeta meta;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace mpad::io
