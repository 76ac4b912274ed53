#include "psi/manifest.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <fstream>

#include "psi/error.hpp"
#include "psi/parallel.hpp"

namespace psi {

TrialManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, fmt::format("cannot open manifest {}", path.string()));

  TrialManifest manifest;
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& t : j.at("trials"))
      manifest.trials.push_back({t.at("path").get<std::string>(), Condition::parse(t.at("condition").get<std::string>())});
    manifest.channel_seed = j.value("channel_seed", std::uint64_t{0});
    manifest.blocks = j.value("blocks", manifest.blocks);
    manifest.per_block_channels = j.value("per_block_channels", manifest.per_block_channels);
    manifest.notes = j.value("notes", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, fmt::format("bad manifest {}: {}", path.string(), e.what()));
  }
  manifest.base_dir = path.parent_path();
  return manifest;
}

void save_manifest(const TrialManifest& manifest, const std::filesystem::path& path) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& e : manifest.trials)
    trials.push_back({{"path", e.path.generic_string()}, {"condition", e.condition.name()}});
  const nlohmann::json j = {
      {"trials", trials},
      {"channel_seed", manifest.channel_seed},
      {"blocks", manifest.blocks},
      {"per_block_channels", manifest.per_block_channels},
      {"notes", manifest.notes},
  };
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, fmt::format("cannot write manifest {}", path.string()));
  out << j.dump(2) << '\n';
}

std::vector<ActivationTrial> load_trials(const TrialManifest& manifest, int threads) {
  if (manifest.trials.empty()) throw Error(ErrorKind::arity, "manifest lists no trials");

  std::vector<ActivationTrial> trials(manifest.trials.size());
  parallel_for(trials.size(), threads, [&](std::size_t i) {
    const auto& entry = manifest.trials[i];
    const auto path = entry.path.is_absolute() ? entry.path : manifest.base_dir / entry.path;
    try {
      trials[i] = load_trial(path);
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("{}: {}", path.string(), e.what()));
    }
    auto& trial = trials[i];
    if (trial.condition.is_custom() && trial.condition.name() == "unlabelled") {
      trial.condition = entry.condition;
    } else if (trial.condition != entry.condition) {
      throw Error(ErrorKind::metadata, fmt::format("{}: file says condition '{}' but manifest says '{}'", path.string(),
                                                   trial.condition.name(), entry.condition.name()));
    }
  });

  for (const auto& t : trials)
    if (t.steps() != trials.front().steps() || t.channels() != trials.front().channels())
      throw Error(ErrorKind::data, fmt::format("trial '{}' is {}x{} but '{}' is {}x{}", t.trial_id, t.steps(), t.channels(),
                                               trials.front().trial_id, trials.front().steps(), trials.front().channels()));
  return trials;
}

}  // namespace psi
