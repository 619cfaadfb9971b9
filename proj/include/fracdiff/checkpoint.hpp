#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fracdiff/datasets.hpp"
#include "fracdiff/kernel_tables.hpp"
#include "fracdiff/schedule.hpp"
#include "fracdiff/score_model.hpp"
#include "fracdiff/space_grid.hpp"

namespace fracdiff {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Everything needed to sample without recomputation.
///
/// File layout (little endian): magic "FRACDIFF", u32 version, u32 d, f64 H,
/// u32 schedule kind, then sections of (4-byte tag, u64 length, payload)
/// closed by the tag "END ". Readers skip tags they do not know.
struct Checkpoint {
  int dim = 2;
  double H = 0.5;
  Schedule schedule;
  SpaceGrid grid;
  KernelTables tables;
  Standardizer standardizer;
  std::string config_text;
  ScoreNet net;                // raw weights
  std::vector<double> ema;     // EMA weights
  std::string rng_state;
  double final_loss = 0.0;
  std::int64_t steps = 0;

  /// Network carrying the EMA weights (used for sampling).
  ScoreNet ema_net() const;
};

std::string serialize_tables(const KernelTables& tables);
KernelTables deserialize_tables(const std::string& bytes);

std::string checkpoint_to_bytes(const Checkpoint& ckpt);
Checkpoint checkpoint_from_bytes(const std::string& bytes);

/// Writes to path + ".tmp" and renames.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// FNV-1a of a byte string.
std::uint64_t fnv1a(const std::string& bytes);

/// Atomically replace path with contents.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace fracdiff
