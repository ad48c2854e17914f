#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hadamard/energy.hpp"
#include "hadamard/errors.hpp"
#include "hadamard/flows.hpp"
#include "hadamard/operators.hpp"
#include "hadamard/serialize.hpp"
#include "hadamard/space.hpp"

namespace hadamard {

enum class Command { resolvent_curve, ppa, semigroup, dirichlet, probe_conjecture };

inline std::string_view command_name(Command c) {
  switch (c) {
    case Command::resolvent_curve: return "resolvent-curve";
    case Command::ppa: return "ppa";
    case Command::semigroup: return "semigroup";
    case Command::dirichlet: return "dirichlet";
    case Command::probe_conjecture: return "probe-conjecture";
  }
  return {};
}

inline std::optional<Command> parse_command(std::string_view s) {
  for (auto c : {Command::resolvent_curve, Command::ppa, Command::semigroup, Command::dirichlet,
                 Command::probe_conjecture}) {
    if (command_name(c) == s) return c;
  }
  return std::nullopt;
}

struct RunConfig {
  Command command = Command::ppa;
  SpaceDescriptor space;
  std::optional<std::string> map;         // map expression
  std::optional<std::string> functional;  // functional expression
  std::optional<std::string> instance;    // path to a Dirichlet instance file
  bool symmetrize = false;
  std::optional<std::string> x0;
  std::optional<std::string> fixed_point;
  std::optional<std::string> schedule;
  std::vector<double> t_grid;
  std::vector<double> lambdas;
  std::optional<std::string> method;      // dirichlet: ppa | flow
  double tol = 1e-8;
  std::uint64_t seed = 0;
  std::size_t max_iter = 100000;
  std::optional<std::string> output;

  std::string base_dir;  // directory against which `instance` is resolved; not serialized
};

namespace detail {

/// Splits at top-level separators, respecting () and [] nesting.
inline std::vector<std::string_view> split_args(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') {
      if (--depth < 0) throw ParseError("unbalanced brackets in '" + std::string(s) + "'");
    }
    if (c == sep && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  if (depth != 0) throw ParseError("unbalanced brackets in '" + std::string(s) + "'");
  out.push_back(trim(s.substr(start)));
  return out;
}

inline std::string strip_spaces(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  }
  return out;
}

struct Call {
  std::string_view name;
  std::optional<std::string_view> inner;  // text between the outer parentheses
};

inline Call parse_call(std::string_view s) {
  s = trim(s);
  const auto open = s.find('(');
  if (open == std::string_view::npos) return {s, std::nullopt};
  if (s.back() != ')') throw ParseError("expected ')' at the end of '" + std::string(s) + "'");
  return {trim(s.substr(0, open)), s.substr(open + 1, s.size() - open - 2)};
}

inline std::vector<double> parse_vector(std::string_view s) {
  s = trim(s);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') {
    throw ParseError("expected a vector '[a,b,...]', got '" + std::string(s) + "'");
  }
  return parse_doubles(s.substr(1, s.size() - 2));
}

inline Eigen::MatrixXd parse_matrix(std::string_view s) {
  s = trim(s);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') {
    throw ParseError("expected a matrix '[a,b;c,d]', got '" + std::string(s) + "'");
  }
  std::vector<std::vector<double>> rows;
  for (auto r : split_args(s.substr(1, s.size() - 2), ';')) rows.push_back(parse_doubles(r));
  const std::size_t cols = rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw ParseError("matrix rows have different lengths");
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

inline std::size_t arity_check(const Call& c, std::size_t got, std::size_t want) {
  if (got != want) {
    throw ParseError(std::string(c.name) + " takes " + std::to_string(want) + " argument(s), got " +
                     std::to_string(got));
  }
  return got;
}

}  // namespace detail

/// Map expressions:
///   identity | rot90 | rotation(θ) | linear([A]) | isometry([Q],[shift])
///   constant(<point>) | project_affine([base],[d1;d2;...]) | project_subtree(c1,...,ck)
///   permute_legs(i1,...,ik) | boost(axis,rapidity)
///   average(w1*<map>, w2*<map>, ...) | compose(<map>, ...) | componentwise(<map>, ...)
inline NonexpansiveMap parse_map(const Space& space, std::string_view text) {
  using namespace detail;
  const Call c = parse_call(text);
  auto args = [&] { return c.inner ? split_args(*c.inner, ',') : std::vector<std::string_view>{}; };
  const auto n = c.name;
  if (n == "identity" && !c.inner) return NonexpansiveMap::projection(space, ConvexSet::whole_space());
  if (n == "rot90" && !c.inner) return NonexpansiveMap::linear(space, rotation_matrix(std::numbers::pi / 2));
  if (!c.inner) throw ParseError("unknown map '" + std::string(n) + "'");
  if (n == "rotation") {
    auto a = args();
    arity_check(c, a.size(), 1);
    return NonexpansiveMap::linear(space, rotation_matrix(parse_double(a[0])));
  }
  if (n == "linear") return NonexpansiveMap::linear(space, parse_matrix(*c.inner));
  if (n == "isometry") {
    auto a = args();
    arity_check(c, a.size(), 2);
    const auto shift = parse_vector(a[1]);
    return NonexpansiveMap::isometry(
        space, {Isometry::Euclidean{parse_matrix(a[0]),
                                    Eigen::Map<const Eigen::VectorXd>(shift.data(), static_cast<Eigen::Index>(shift.size()))}});
  }
  if (n == "constant") return NonexpansiveMap::projection(space, ConvexSet::singleton(parse_point(space, *c.inner)));
  if (n == "project_affine") {
    auto a = args();
    arity_check(c, a.size(), 2);
    std::vector<std::vector<double>> dirs;
    const auto m = parse_matrix(a[1]);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(m.cols()));
      for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
      dirs.push_back(std::move(row));
    }
    return NonexpansiveMap::projection(space, ConvexSet::affine(parse_vector(a[0]), std::move(dirs)));
  }
  if (n == "project_subtree") return NonexpansiveMap::projection(space, ConvexSet::spider_subtree(parse_doubles(*c.inner)));
  if (n == "permute_legs") {
    std::vector<std::size_t> image;
    for (auto a : args()) image.push_back(parse_count(a));
    return NonexpansiveMap::isometry(space, {Isometry::LegPermutation{std::move(image)}});
  }
  if (n == "boost") {
    auto a = args();
    arity_check(c, a.size(), 2);
    const std::size_t axis = parse_count(a[0]);
    if (space.kind() != SpaceKind::hyperbolic || axis < 1 || axis > space.dim()) {
      throw StructuralError("boost needs a hyperbolic space and an axis in 1..n");
    }
    return NonexpansiveMap::isometry(space, lorentz_boost(space.dim(), axis, parse_double(a[1])));
  }
  if (n == "average") {
    std::vector<NonexpansiveMap> maps;
    std::vector<double> weights;
    for (auto a : args()) {
      const auto star = a.find('*');
      if (star == std::string_view::npos) throw ParseError("average terms need the form 'w*map'");
      weights.push_back(parse_double(a.substr(0, star)));
      maps.push_back(parse_map(space, a.substr(star + 1)));
    }
    return NonexpansiveMap::geodesic_average(std::move(maps), std::move(weights));
  }
  if (n == "compose") {
    std::vector<NonexpansiveMap> maps;
    for (auto a : args()) maps.push_back(parse_map(space, a));
    return NonexpansiveMap::composition(std::move(maps));
  }
  if (n == "componentwise") {
    if (space.kind() != SpaceKind::product) throw StructuralError("componentwise needs a product space");
    const auto a = args();
    if (a.size() != space.factors().size()) throw StructuralError("componentwise needs one map per factor");
    std::vector<NonexpansiveMap> maps;
    for (std::size_t i = 0; i < a.size(); ++i) maps.push_back(parse_map(space.factors()[i], a[i]));
    return NonexpansiveMap::componentwise(space, std::move(maps));
  }
  throw ParseError("unknown map '" + std::string(n) + "'");
}

/// Functional expressions: quadratic([Q],[c]) for ½(y-c)ᵀQ(y-c).
inline EuclideanQuadratic parse_functional(const Space& space, std::string_view text) {
  using namespace detail;
  const Call c = parse_call(text);
  if (c.name != "quadratic" || !c.inner) throw ParseError("unknown functional '" + std::string(text) + "'");
  const auto a = split_args(*c.inner, ',');
  arity_check(c, a.size(), 2);
  const auto offset = parse_vector(a[1]);
  EuclideanQuadratic q(parse_matrix(a[0]),
                       Eigen::Map<const Eigen::VectorXd>(offset.data(), static_cast<Eigen::Index>(offset.size())));
  if (!(q.geometry() == space)) throw StructuralError("functional dimension does not match the space");
  return q;
}

/// Schedules: "constant λ", "power c α" (λ_n = c n^-α), "explicit λ1, λ2, ...".
inline StepSchedule parse_schedule(std::string_view text) {
  text = detail::trim(text);
  const auto sp = text.find_first_of(" \t");
  const auto kind = text.substr(0, sp);
  const auto rest = sp == std::string_view::npos ? std::string_view{} : detail::trim(text.substr(sp));
  std::vector<std::string_view> words;
  for (std::size_t i = 0; i < rest.size();) {
    while (i < rest.size() && std::isspace(static_cast<unsigned char>(rest[i]))) ++i;
    std::size_t j = i;
    while (j < rest.size() && !std::isspace(static_cast<unsigned char>(rest[j]))) ++j;
    if (j > i) words.push_back(rest.substr(i, j - i));
    i = j;
  }
  if (kind == "constant" && words.size() == 1) return StepSchedule::constant(parse_double(words[0]));
  if (kind == "power" && words.size() == 2) return StepSchedule::power(parse_double(words[0]), parse_double(words[1]));
  if (kind == "explicit") return StepSchedule::explicit_list(parse_doubles(rest));
  throw ParseError("schedule must be 'constant λ', 'power c α' or 'explicit λ1, λ2, ...'");
}

inline std::string format_schedule(const StepSchedule& s) {
  switch (s.kind()) {
    case StepSchedule::Kind::constant: return "constant " + format_double(s.scale());
    case StepSchedule::Kind::power: return "power " + format_double(s.scale()) + " " + format_double(s.exponent());
    case StepSchedule::Kind::explicit_list: {
      std::string out = "explicit ";
      for (std::size_t i = 0; i < s.steps().size(); ++i) {
        if (i) out += ", ";
        out += format_double(s.steps()[i]);
      }
      return out;
    }
  }
  return {};
}

inline std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out;
}

/// Checks the cross-key invariants and that every expression builds.
inline void validate(const RunConfig& c) {
  if (!(c.tol > 0.0) || !std::isfinite(c.tol)) throw ValidationError("tol must be > 0");
  if (c.max_iter < 1) throw ValidationError("max_iter must be >= 1");
  const int sources = int(c.map.has_value()) + int(c.functional.has_value()) + int(c.instance.has_value());
  if (sources != 1) throw ValidationError("exactly one of map, functional, instance must be given");

  const Space space(c.space);
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ValidationError(what);
  };
  auto forbid = [](bool present, const char* what) {
    if (present) throw ValidationError(what);
  };
  auto check_grid = [&] {
    need(!c.t_grid.empty(), "t_grid is required for this command");
    if (c.t_grid.front() != 0.0) throw ValidationError("t_grid must start at 0");
    for (std::size_t i = 1; i < c.t_grid.size(); ++i) {
      if (!(c.t_grid[i] > c.t_grid[i - 1])) throw ValidationError("t_grid must be strictly increasing");
    }
  };
  try {
    if (c.map) (void)parse_map(space, *c.map);
    if (c.functional) (void)parse_functional(space, *c.functional);
    if (c.x0) (void)parse_point(space, *c.x0);
    if (c.fixed_point) (void)parse_point(space, *c.fixed_point);
    if (c.schedule) (void)parse_schedule(*c.schedule);
  } catch (const StructuralError& e) {
    throw ValidationError(e.what());
  }
  for (double l : c.lambdas) {
    if (!(l > 0.0) || !std::isfinite(l)) throw ValidationError("lambdas need a positive step");
  }

  switch (c.command) {
    case Command::resolvent_curve:
      need(c.map.has_value(), "resolvent-curve needs a map");
      need(!c.lambdas.empty(), "resolvent-curve needs lambdas");
      for (std::size_t i = 1; i < c.lambdas.size(); ++i) {
        if (!(c.lambdas[i] > c.lambdas[i - 1])) throw ValidationError("lambdas must be strictly increasing");
      }
      break;
    case Command::ppa:
      need(!c.instance, "ppa needs a map or a functional");
      need(c.schedule.has_value(), "ppa needs a schedule");
      break;
    case Command::semigroup:
      need(!c.instance, "semigroup needs a map or a functional");
      check_grid();
      break;
    case Command::dirichlet:
      need(c.instance.has_value(), "dirichlet needs an instance");
      if (c.method && *c.method != "ppa" && *c.method != "flow") throw ValidationError("method must be ppa or flow");
      if (c.method && *c.method == "flow") check_grid();
      break;
    case Command::probe_conjecture:
      need(c.instance.has_value(), "probe-conjecture needs an instance");
      check_grid();
      break;
  }
  forbid(c.method && c.command != Command::dirichlet, "method applies only to dirichlet");
  forbid(c.symmetrize && !c.instance, "symmetrize applies only to instances");
}

/// Strict `key: value` parsing; '#' starts a comment line. Unknown or
/// repeated keys are errors.
inline RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::map<std::string, std::size_t> seen;
  bool have_command = false;
  bool have_space = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    const std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    const auto body = detail::trim(raw);
    if (body.empty() || body.front() == '#') continue;
    const std::size_t indent = static_cast<std::size_t>(body.data() - raw.data());
    const auto colon = body.find(':');
    if (colon == std::string_view::npos) throw ParseError("expected 'key: value'", line_no, indent + 1);
    const std::string key(detail::trim(body.substr(0, colon)));
    const auto value = detail::trim(body.substr(colon + 1));
    const std::size_t value_col =
        value.empty() ? indent + colon + 2 : static_cast<std::size_t>(value.data() - raw.data()) + 1;
    if (seen.count(key)) throw ParseError("duplicate key '" + key + "'", line_no, indent + 1);
    seen[key] = line_no;
    if (value.empty()) throw ParseError("key '" + key + "' has no value", line_no, value_col);

    try {
      if (key == "command") {
        auto c = parse_command(value);
        if (!c) throw ParseError("unknown command '" + std::string(value) + "'");
        cfg.command = *c;
        have_command = true;
      } else if (key == "space") {
        cfg.space = parse_descriptor(value);
        have_space = true;
      } else if (key == "map") {
        cfg.map = detail::strip_spaces(value);
      } else if (key == "functional") {
        cfg.functional = detail::strip_spaces(value);
      } else if (key == "instance") {
        cfg.instance = std::string(value);
      } else if (key == "symmetrize") {
        if (value == "true") cfg.symmetrize = true;
        else if (value == "false") cfg.symmetrize = false;
        else throw ParseError("symmetrize must be true or false");
      } else if (key == "x0") {
        cfg.x0 = detail::strip_spaces(value);
      } else if (key == "fixed_point") {
        cfg.fixed_point = detail::strip_spaces(value);
      } else if (key == "schedule") {
        cfg.schedule = format_schedule(parse_schedule(value));
      } else if (key == "t_grid") {
        cfg.t_grid = parse_doubles(value);
      } else if (key == "lambdas") {
        cfg.lambdas = parse_doubles(value);
      } else if (key == "method") {
        cfg.method = std::string(value);
      } else if (key == "tol") {
        cfg.tol = parse_double(value);
      } else if (key == "seed") {
        cfg.seed = parse_count(value);
      } else if (key == "max_iter") {
        cfg.max_iter = parse_count(value);
      } else if (key == "output") {
        cfg.output = std::string(value);
      } else {
        throw ParseError("unknown key '" + key + "'", line_no, indent + 1);
      }
    } catch (const ParseError& e) {
      if (e.line() != 0) throw;
      throw ParseError(e.what(), line_no, value_col);
    }
  }
  if (!have_command) throw ValidationError("config needs a command");
  if (!have_space) throw ValidationError("config needs a space");
  validate(cfg);
  return cfg;
}

inline std::string serialize_config(const RunConfig& c) {
  std::string s;
  auto put = [&](const char* key, const std::string& v) { s += std::string(key) + ": " + v + "\n"; };
  put("command", std::string(command_name(c.command)));
  put("space", format_descriptor(c.space));
  if (c.map) put("map", *c.map);
  if (c.functional) put("functional", *c.functional);
  if (c.instance) put("instance", *c.instance);
  if (c.symmetrize) put("symmetrize", "true");
  if (c.method) put("method", *c.method);
  if (c.x0) put("x0", *c.x0);
  if (c.fixed_point) put("fixed_point", *c.fixed_point);
  if (c.schedule) put("schedule", *c.schedule);
  if (!c.t_grid.empty()) put("t_grid", format_list(c.t_grid));
  if (!c.lambdas.empty()) put("lambdas", format_list(c.lambdas));
  put("tol", format_double(c.tol));
  put("seed", std::to_string(c.seed));
  put("max_iter", std::to_string(c.max_iter));
  if (c.output) put("output", *c.output);
  return s;
}

}  // namespace hadamard
