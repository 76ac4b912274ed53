#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "psi/trial.hpp"

namespace psi::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("psi_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline ActivationTrial make_trial(Matrix data, std::string id = "t", Condition condition = {}) {
  ActivationTrial trial;
  trial.trial_id = std::move(id);
  trial.condition = std::move(condition);
  trial.channel_indices.resize(data.cols());
  for (std::size_t c = 0; c < data.cols(); ++c) trial.channel_indices[c] = static_cast<int>(c);
  trial.data = std::move(data);
  return trial;
}

inline Matrix columns_to_matrix(const std::vector<std::vector<double>>& cols) {
  Matrix m(cols.front().size(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) m.set_column(c, cols[c]);
  return m;
}

}  // namespace psi::testing
