#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "ergogof/model.hpp"

namespace testing {

inline ergogof::DiffusionModel ou_model(double a = 1.0, double b = 0.0, double sigma = std::sqrt(2.0)) {
  return {ergogof::DriftSpec::ou(a, b), ergogof::DiffusionSpec::constant(sigma), "ou"};
}

inline ergogof::DiffusionModel switching_model(double a = 1.0, double b = 0.0, double sigma = 1.0) {
  return {ergogof::DriftSpec::switching(a, b), ergogof::DiffusionSpec::constant(sigma), "switching"};
}

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("ergogof_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace testing
