#pragma once

#include <cctype>
#include <cstddef>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hadamard/errors.hpp"
#include "hadamard/flows.hpp"
#include "hadamard/markov.hpp"
#include "hadamard/serialize.hpp"
#include "hadamard/space.hpp"

namespace hadamard {

inline std::string format_field(const Space& target, const MapField& f) {
  std::string s;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i) s += " | ";
    s += format_point(target, f[i]);
  }
  return s;
}

inline std::string format_any(const Space& space, const Point& p) { return format_point(space, p); }
inline std::string format_any(const FieldSpace& fs, const MapField& f) { return format_field(fs.target(), f); }

inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// step,time,point,residual,fejer_distance[,energy]; absent optional values
/// are empty fields.
template <class G>
void write_trajectory_csv(std::ostream& os, const G& geom, const Trajectory<typename G::point_type>& traj,
                          bool with_energy) {
  os << "step,time,point,residual,fejer_distance";
  if (with_energy) os << ",energy";
  os << '\n';
  for (const auto& s : traj.samples) {
    os << s.step << ',' << format_double(s.time) << ',' << csv_quote(format_any(geom, s.point)) << ','
       << format_double(s.residual) << ',';
    if (s.fejer_distance) os << format_double(*s.fejer_distance);
    if (with_energy) {
      os << ',';
      if (s.energy) os << format_double(*s.energy);
    }
    os << '\n';
  }
}

/// A Dirichlet instance read from text.
struct Instance {
  Eigen::MatrixXd p;
  std::vector<double> mu;
  std::vector<std::size_t> interior;
  std::vector<Point> points;
};

/// Text form:
///   states m
///   mu: v1 ... vm
///   p 0: p_00 ... p_0(m-1)      (one line per state, 0-based, in order)
///   D: i1 i2 ...
///   <point of state 0>
///   ...
/// Blank lines and lines starting with '#' are ignored.
inline Instance parse_instance(std::string_view text, const Space& target) {
  struct Line {
    std::size_t number;
    std::string_view body;
  };
  std::vector<Line> lines;
  std::size_t number = 0;
  while (!text.empty()) {
    ++number;
    const auto nl = text.find('\n');
    auto raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    auto body = detail::trim(raw);
    if (body.empty() || body.front() == '#') continue;
    lines.push_back({number, body});
  }
  std::size_t cursor = 0;
  auto next = [&](const char* what) -> const Line& {
    if (cursor >= lines.size()) throw ParseError(std::string("instance ended before ") + what, number + 1, 1);
    return lines[cursor++];
  };
  auto fields = [](std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      std::size_t j = i;
      while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
      if (j > i) out.push_back(s.substr(i, j - i));
      i = j;
    }
    return out;
  };
  auto after_prefix = [&](const Line& l, std::string_view prefix) {
    if (l.body.substr(0, prefix.size()) != prefix) {
      throw ParseError("expected '" + std::string(prefix) + "'", l.number, 1);
    }
    return l.body.substr(prefix.size());
  };
  auto rethrow = [](const Line& l, const ParseError& e) -> ParseError {
    return ParseError(e.what(), l.number, 1);
  };

  Instance inst;
  const Line& header = next("the states line");
  std::size_t m = 0;
  try {
    m = parse_count(after_prefix(header, "states"));
  } catch (const ParseError& e) {
    throw rethrow(header, e);
  }
  if (m == 0) throw ValidationError("instance needs at least one state");

  const Line& mu_line = next("the mu line");
  try {
    for (auto v : fields(after_prefix(mu_line, "mu:"))) inst.mu.push_back(parse_double(v));
  } catch (const ParseError& e) {
    throw rethrow(mu_line, e);
  }
  if (inst.mu.size() != m) {
    throw ParseError("mu needs " + std::to_string(m) + " values", mu_line.number, 1);
  }

  inst.p = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const Line& row = next("all kernel rows");
    const std::string prefix = "p " + std::to_string(i) + ":";
    try {
      const auto vals = fields(after_prefix(row, prefix));
      if (vals.size() != m) throw ParseError("kernel row needs " + std::to_string(m) + " values");
      for (std::size_t j = 0; j < m; ++j) {
        inst.p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_double(vals[j]);
      }
    } catch (const ParseError& e) {
      throw rethrow(row, e);
    }
  }

  const Line& d_line = next("the D line");
  try {
    for (auto v : fields(after_prefix(d_line, "D:"))) inst.interior.push_back(parse_count(v));
  } catch (const ParseError& e) {
    throw rethrow(d_line, e);
  }

  for (std::size_t i = 0; i < m; ++i) {
    const Line& pl = next("all state points");
    try {
      inst.points.push_back(parse_point(target, pl.body));
    } catch (const ParseError& e) {
      throw rethrow(pl, e);
    }
  }
  if (cursor != lines.size()) throw ParseError("unexpected trailing content", lines[cursor].number, 1);
  return inst;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Builds the Dirichlet problem; the instance points are the anchor h.
inline DirichletSpec make_dirichlet_spec(const Instance& inst, const Space& target, bool symmetrize = false) {
  MarkovKernel k = symmetrize ? MarkovKernel::symmetrize(inst.p, inst.mu) : MarkovKernel(inst.p, inst.mu);
  return DirichletSpec(std::move(k), target, inst.interior, MapField{inst.points});
}

}  // namespace hadamard
