#pragma once

// Invariant suites behind `oslsim verify`. Each item is a deterministic check
// at one of two scales; items that depend on a model use the configured one
// when it is given and a shipped reference model otherwise.

#include "oslsim/symbol.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace osl::cli {

enum class Scale { quick, desk };

struct VerifyContext {
  Scale scale = Scale::desk;
  std::uint64_t seed = 1;
  int threads = 1;
  std::optional<OslModel> model;  // from the config, if any
  std::optional<Box> box;
  std::ostream* log = nullptr;
};

struct VerifyItem {
  std::string suite;
  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string detail;
  double seconds = 0.0;
};

const std::vector<std::string>& verify_suites();

/// Runs the selected suites in the listed order. Unknown names are rejected by
/// the caller; this function assumes they are valid.
std::vector<VerifyItem> run_verify(const std::vector<std::string>& suites,
                                   const VerifyContext& ctx);

nlohmann::json to_json(const VerifyItem& item);

}  // namespace osl::cli
