#include "config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace osl::cli {

ConfigError::ConfigError(const std::string& msg, int line)
    : std::runtime_error("config line " + std::to_string(line) + ": " + msg), line_(line) {}

int Locator::line_of_offset(std::size_t offset) const {
  offset = std::min(offset, text_.size());
  int line = 1;
  for (std::size_t i = 0; i < offset; ++i) line += text_[i] == '\n';
  return line;
}

int Locator::line(const std::vector<std::string>& path) const {
  std::size_t pos = 0;
  std::size_t found = std::string::npos;
  for (const auto& key : path) {
    if (!key.empty() && std::isdigit(static_cast<unsigned char>(key[0]))) continue;
    const std::size_t at = text_.find('"' + key + '"', pos);
    if (at == std::string::npos) break;
    found = at;
    pos = at + key.size() + 2;
  }
  if (found == std::string::npos) {
    const std::size_t brace = text_.find('{');
    return line_of_offset(brace == std::string::npos ? 0 : brace);
  }
  return line_of_offset(found);
}

std::string Node::where(const std::string& key) const {
  std::string s;
  for (const auto& p : path_) s += "/" + p;
  if (!key.empty()) s += "/" + key;
  return s.empty() ? "/" : s;
}

void Node::fail(const std::string& msg) const { throw ConfigError(where() + ": " + msg, line()); }

void Node::fail_key(const std::string& key, const std::string& msg) const {
  auto p = path_;
  p.push_back(key);
  throw ConfigError(where(key) + ": " + msg, loc_->line(p));
}

bool Node::has(const std::string& key) const {
  return j_->is_object() && j_->contains(key) && !(*j_)[key].is_null();
}

const Json& Node::get(const std::string& key) const {
  if (!j_->is_object()) fail("expected an object");
  if (!has(key)) fail("missing required field \"" + key + "\"");
  return (*j_)[key];
}

Node Node::at(const std::string& key) const {
  const Json& j = get(key);
  auto p = path_;
  p.push_back(key);
  return Node(j, std::move(p), *loc_);
}

std::optional<Node> Node::find(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return at(key);
}

double Node::number(const std::string& key) const {
  const Json& j = get(key);
  if (!j.is_number()) fail_key(key, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail_key(key, "expected a finite number");
  return v;
}

double Node::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::int64_t Node::integer(const std::string& key) const {
  const Json& j = get(key);
  if (!j.is_number_integer()) fail_key(key, "expected an integer");
  return j.get<std::int64_t>();
}

std::int64_t Node::integer(const std::string& key, std::int64_t fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::string Node::string(const std::string& key) const {
  const Json& j = get(key);
  if (!j.is_string()) fail_key(key, "expected a string");
  return j.get<std::string>();
}

std::string Node::string(const std::string& key, const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

bool Node::boolean(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const Json& j = get(key);
  if (!j.is_boolean()) fail_key(key, "expected true or false");
  return j.get<bool>();
}

namespace {

Vector to_vector(const Json& j, const Node& owner, const std::string& key, int dim) {
  if (!j.is_array() || j.empty()) owner.fail_key(key, "expected a non-empty array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) owner.fail_key(key, "expected numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    if (!std::isfinite(v(static_cast<Eigen::Index>(i)))) owner.fail_key(key, "non-finite entry");
  }
  if (dim >= 0 && v.size() != dim) {
    owner.fail_key(key, "expected length " + std::to_string(dim) + ", got " +
                            std::to_string(v.size()));
  }
  return v;
}

}  // namespace

Vector Node::vector(const std::string& key, int dim) const {
  return to_vector(get(key), *this, key, dim);
}

std::vector<double> Node::numbers(const std::string& key) const {
  const Vector v = vector(key);
  return {v.data(), v.data() + v.size()};
}

std::vector<Vector> Node::vectors(const std::string& key, int dim) const {
  const Json& j = get(key);
  if (!j.is_array() || j.empty()) fail_key(key, "expected a non-empty array of vectors");
  std::vector<Vector> out;
  for (const auto& row : j) out.push_back(to_vector(row, *this, key, dim));
  return out;
}

Matrix Node::matrix(const std::string& key, int dim) const {
  const auto rows = vectors(key, dim);
  if (static_cast<int>(rows.size()) != dim) {
    fail_key(key, "expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
  }
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i) m.row(i) = rows[static_cast<std::size_t>(i)].transpose();
  return m;
}

std::string RunConfig::model_hash() const {
  // FNV-1a over the canonical (key-sorted, compact) dump of the model section.
  const std::string canon = doc.contains("model") ? doc["model"].dump() : std::string();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

RunConfig parse_config(std::string text, std::string path) {
  RunConfig cfg;
  cfg.path = std::move(path);
  cfg.locator = std::make_unique<Locator>(text);
  try {
    cfg.doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what(),
                      cfg.locator->line_of_offset(e.byte > 0 ? e.byte - 1 : 0));
  }
  cfg.text = std::move(text);
  if (!cfg.doc.is_object()) throw ConfigError("top level must be a JSON object", 1);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading config file " + path);
  return parse_config(ss.str(), path);
}

namespace {

SymMatrix sym_from(const Node& n, const std::string& key, int dim) {
  Matrix m = n.matrix(key, dim);
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) {
    n.fail_key(key, "matrix is not symmetric (E1)");
  }
  return SymMatrix(0.5 * (m + m.transpose()));
}

SymMatrix exponent_matrix(const Node& n, const std::string& key, int dim) {
  const Node m = n.at(key);
  if (m.json().is_array() && !m.json().empty() && m.json()[0].is_number()) {
    return SymMatrix::diagonal(n.vector(key, dim));
  }
  return sym_from(n, key, dim);
}

ScalarField blend_from(const Node& n, int dim) {
  const std::string kind = n.string("kind");
  const auto coord = n.integer("coord", 0);
  if (coord < 0 || coord >= dim) n.fail_key("coord", "coordinate out of range");
  if (kind == "sin") {
    const double k = n.number("k");
    if (k == 0.0) n.fail_key("k", "frequency must be nonzero");
    return sin_blend(static_cast<int>(coord), k);
  }
  if (kind == "clamp") {
    const double lo = n.number("lo");
    const double hi = n.number("hi");
    if (!(hi > lo)) n.fail_key("hi", "need hi > lo");
    return clamp_blend(static_cast<int>(coord), lo, hi);
  }
  n.fail_key("kind", "unknown blend kind \"" + kind + "\" (expected sin or clamp)");
}

ExponentField field_from(const Node& f, int dim) {
  if (!f.has("kind")) f.fail("missing required field \"kind\"");
  const std::string kind = f.string("kind");
  ExponentField field = [&]() -> ExponentField {
    if (kind == "constant") return make_constant(exponent_matrix(f, "matrix", dim));
    if (kind == "stable_like_sin") {
      const auto coord = f.integer("coord", 0);
      if (coord < 0 || coord >= dim) f.fail_key("coord", "coordinate out of range");
      if (f.has("alpha_min") || f.has("alpha_max")) {
        const double lo = f.number("alpha_min");
        const double hi = f.number("alpha_max");
        if (!(hi >= lo)) f.fail_key("alpha_max", "need alpha_max >= alpha_min");
        return make_stable_like(dim,
                                sin_alpha(0.5 * (lo + hi), 0.5 * (hi - lo), static_cast<int>(coord)));
      }
      return make_stable_like(
          dim, sin_alpha(f.number("center"), f.number("amplitude"), static_cast<int>(coord)));
    }
    if (kind == "interpolated") {
      return make_interpolated(exponent_matrix(f, "low", dim), exponent_matrix(f, "high", dim),
                               blend_from(f.at("blend"), dim));
    }
    f.fail_key("kind", "unknown field kind \"" + kind +
                           "\" (expected constant, stable_like_sin or interpolated)");
  }();
  if (const auto d = f.find("declared")) {
    std::optional<double> b = field.b();
    if (d->has("b")) b = d->number("b");
    return field.with_declared(d->number("a", field.a()), b, d->number("lip", field.lip()));
  }
  return field;
}

SpectralMeasure sigma_from(const Node& s, int dim, std::vector<std::string>& warnings) {
  const std::string kind = s.string("kind");
  if (kind == "uniform") {
    const double mass = s.number("mass");
    if (!(mass > 0.0)) s.fail_key("mass", "mass must be positive");
    return SpectralMeasure::uniform(dim, mass);
  }
  if (kind == "discrete") {
    auto atoms = s.vectors("atoms", dim);
    const auto weights = s.numbers("weights");
    if (weights.size() != atoms.size()) s.fail_key("weights", "need one weight per atom");
    for (double w : weights) {
      if (!(w > 0.0)) s.fail_key("weights", "weights must be positive");
    }
    for (auto& a : atoms) {
      const double n = a.norm();
      if (!(n > 0.0)) s.fail_key("atoms", "zero atom");
      if (std::abs(n - 1.0) > 1e-12) {
        warnings.push_back("sigma atom normalised to the unit sphere (line " +
                           std::to_string(s.line()) + ")");
        a /= n;
      }
    }
    return SpectralMeasure::discrete(std::move(atoms), weights);
  }
  s.fail_key("kind", "unknown spectral measure kind \"" + kind + "\" (expected discrete or uniform)");
}

}  // namespace

int model_dim(const RunConfig& cfg) {
  const Node m = cfg.root().at("model");
  const auto d = m.integer("dim");
  if (d < 1 || d > 8) m.fail_key("dim", "dimension must lie in [1, 8]");
  return static_cast<int>(d);
}

OslModel build_model(const RunConfig& cfg) {
  const int dim = model_dim(cfg);
  const Node m = cfg.root().at("model");
  if (!m.has("field")) m.fail("missing required field \"field\"");
  ExponentField field = field_from(m.at("field"), dim);
  SpectralMeasure sigma = sigma_from(m.at("sigma"), dim, cfg.warnings);
  return OslModel(std::move(field), std::move(sigma));
}

QuadSpec build_quad(const RunConfig& cfg) {
  QuadSpec q;
  const auto n = cfg.root().find("quad");
  if (!n) return q;
  q.rel_tol = n->number("rel_tol", q.rel_tol);
  q.R_max = n->number("R_max", q.R_max);
  q.max_subdivisions = static_cast<int>(n->integer("max_subdivisions", q.max_subdivisions));
  q.sphere_tol = n->number("sphere_tol", q.sphere_tol);
  try {
    q.validate();
  } catch (const std::invalid_argument& e) {
    n->fail(e.what());
  }
  return q;
}

SimSpec build_sim(const RunConfig& cfg, int dim, std::optional<std::uint64_t> seed_override) {
  const Node s = cfg.root().at("sim");
  SimSpec spec;
  SimConfig& c = spec.config;
  c.horizon = s.number("horizon", c.horizon);
  c.eps = s.number("eps", c.eps);
  if (s.has("seed")) {
    const Json& j = s.json()["seed"];
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
      s.fail_key("seed", "seed must be a non-negative integer");
    }
    c.seed = j.get<std::uint64_t>();
  }
  if (seed_override) c.seed = *seed_override;
  const std::string drift = s.string("drift_mode", "auto");
  if (drift == "auto") {
    c.drift_mode = DriftMode::automatic;
  } else if (drift == "force_zero") {
    c.drift_mode = DriftMode::force_zero;
  } else if (drift == "force_numeric") {
    c.drift_mode = DriftMode::force_numeric;
  } else {
    s.fail_key("drift_mode", "expected auto, force_zero or force_numeric");
  }
  const std::string record = s.string("record_mode", "events_only");
  if (record == "events_only") {
    c.record_mode = RecordMode::events_only;
  } else if (record == "grid") {
    c.record_mode = RecordMode::grid;
    c.grid_dt = s.number("grid_dt");
  } else {
    s.fail_key("record_mode", "expected events_only or grid");
  }
  if (s.has("stop_radius")) c.stop_radius = s.number("stop_radius");
  const auto n = s.integer("n_paths", 1000);
  if (n < 1) s.fail_key("n_paths", "n_paths must be >= 1");
  spec.n_paths = static_cast<std::size_t>(n);
  spec.x0 = s.has("x0") ? s.vector("x0", dim) : Vector::Zero(dim);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    s.fail(e.what());
  }
  return spec;
}

Box build_box(const std::optional<Node>& node, int dim) {
  if (!node) {
    return {Vector::Constant(dim, -std::numbers::pi), Vector::Constant(dim, std::numbers::pi)};
  }
  Box b{node->vector("lo", dim), node->vector("hi", dim)};
  if (!((b.hi - b.lo).minCoeff() > 0.0)) node->fail_key("hi", "need hi > lo componentwise");
  return b;
}

}  // namespace osl::cli
