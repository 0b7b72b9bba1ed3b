#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "binderlsc/error.hpp"
#include "binderlsc/lexicon.hpp"
#include "binderlsc/rng.hpp"

namespace testing {

// Code of the binderlsc::Error thrown by f, or nullopt if it returns.
template <typename F>
std::optional<binderlsc::ErrorCode> error_code(F&& f) {
  try {
    f();
  } catch (const binderlsc::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

#define CHECK_ERROR(expr, code) \
  CHECK(::testing::error_code([&] { (void)(expr); }) == ::binderlsc::ErrorCode::code)

// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("binderlsc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string lexicon_header(bool with_pos) {
  std::string h = with_pos ? "word,pos" : "word";
  for (const auto& n : binderlsc::canonical_feature_names()) h += "," + n;
  return h + "\n";
}

inline std::string lexicon_row(const std::string& word, const Eigen::VectorXd& values,
                               const std::string& pos = {}) {
  std::string r = word;
  if (!pos.empty()) r += "," + pos;
  for (Eigen::Index i = 0; i < values.size(); ++i) r += "," + std::to_string(values[i]);
  return r + "\n";
}

inline Eigen::VectorXd random_binder(binderlsc::Rng& rng) {
  Eigen::VectorXd v(65);
  for (Eigen::Index i = 0; i < 65; ++i) v[i] = rng.uniform(0.0, 6.0);
  return v;
}

}  // namespace testing
