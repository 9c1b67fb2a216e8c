#pragma once

// JSON run configuration. Every semantic error is reported against the line
// of the offending key in the source text.

#include "oslsim/path_stats.hpp"
#include "oslsim/simulator.hpp"
#include "oslsim/symbol.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace osl::cli {

using Json = nlohmann::json;

/// Malformed or out-of-range configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, int line);
  int line() const { return line_; }

 private:
  int line_;
};

/// Unreadable input or unwritable output (exit code 3).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maps JSON key paths back to source lines. Keys are located by a forward scan,
/// which is exact for configs that do not repeat a key name inside a value.
class Locator {
 public:
  explicit Locator(std::string text) : text_(std::move(text)) {}
  int line(const std::vector<std::string>& path) const;
  int line_of_offset(std::size_t offset) const;

 private:
  std::string text_;
};

/// A JSON object together with its key path, for anchored accessors.
class Node {
 public:
  Node(const Json& j, std::vector<std::string> path, const Locator& loc)
      : j_(&j), path_(std::move(path)), loc_(&loc) {}

  const Json& json() const { return *j_; }
  bool has(const std::string& key) const;
  Node at(const std::string& key) const;  // required key
  std::optional<Node> find(const std::string& key) const;

  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  std::string string(const std::string& key) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  Vector vector(const std::string& key, int dim = -1) const;
  Matrix matrix(const std::string& key, int dim) const;
  std::vector<Vector> vectors(const std::string& key, int dim) const;
  std::vector<double> numbers(const std::string& key) const;

  [[noreturn]] void fail(const std::string& msg) const;
  [[noreturn]] void fail_key(const std::string& key, const std::string& msg) const;
  int line() const { return loc_->line(path_); }
  std::string where(const std::string& key = "") const;

 private:
  const Json& get(const std::string& key) const;

  const Json* j_;
  std::vector<std::string> path_;
  const Locator* loc_;
};

struct SimSpec {
  SimConfig config;
  std::size_t n_paths = 1000;
  Vector x0;
};

struct RunConfig {
  std::string path;
  std::string text;
  Json doc;
  std::unique_ptr<Locator> locator;
  mutable std::vector<std::string> warnings;

  Node root() const { return Node(doc, {}, *locator); }
  bool has(const std::string& key) const { return doc.is_object() && doc.contains(key); }
  std::string model_hash() const;
};

/// Parses the file; syntax errors become ConfigError with the parser's line.
RunConfig load_config(const std::string& path);
RunConfig parse_config(std::string text, std::string path = "<string>");

/// Builds the model from the "model" section. Kinds and shapes are config
/// errors; admissibility failures surface as AdmissibilityError.
OslModel build_model(const RunConfig& cfg);
int model_dim(const RunConfig& cfg);

QuadSpec build_quad(const RunConfig& cfg);

/// The "sim" section with an optional seed override. n_paths >= 1 is enforced.
SimSpec build_sim(const RunConfig& cfg, int dim, std::optional<std::uint64_t> seed_override);

/// Box from {"lo": [...], "hi": [...]}, or [-pi, pi]^dim when absent.
Box build_box(const std::optional<Node>& node, int dim);

}  // namespace osl::cli
