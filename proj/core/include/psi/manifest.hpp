#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "psi/trial.hpp"

namespace psi {

struct ManifestEntry {
  std::filesystem::path path;  // relative paths resolve against the manifest's directory
  Condition condition;
};

struct TrialManifest {
  std::vector<ManifestEntry> trials;
  std::uint64_t channel_seed = 0;
  std::vector<int> blocks{1, 4, 7, 10};
  int per_block_channels = 32;
  std::string notes;

  std::filesystem::path base_dir;  // set by load_manifest; not serialised
};

TrialManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const TrialManifest& manifest, const std::filesystem::path& path);

// Loads every referenced trial in manifest order and checks that they share
// T and C. The manifest's condition label wins over a CSV trial's placeholder;
// a binary trial whose own label disagrees is a metadata error.
std::vector<ActivationTrial> load_trials(const TrialManifest& manifest, int threads = 1);

}  // namespace psi
