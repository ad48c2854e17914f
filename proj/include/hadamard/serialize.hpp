#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "hadamard/errors.hpp"
#include "hadamard/space.hpp"

namespace hadamard {

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

/// Splits on `sep` at parenthesis depth zero.
inline std::vector<std::string_view> split_top(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (depth < 0) throw ParseError("unbalanced ')' in '" + std::string(s) + "'");
    if (s[i] == sep && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  if (depth != 0) throw ParseError("unbalanced '(' in '" + std::string(s) + "'");
  out.push_back(trim(s.substr(start)));
  return out;
}

inline std::string_view strip_parens(std::string_view s) {
  s = trim(s);
  if (s.size() < 2 || s.front() != '(' || s.back() != ')') {
    throw ParseError("expected a parenthesized item, got '" + std::string(s) + "'");
  }
  return trim(s.substr(1, s.size() - 2));
}

}  // namespace detail

inline double parse_double(std::string_view s) {
  s = detail::trim(s);
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
    throw ParseError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

inline std::size_t parse_count(std::string_view s) {
  s = detail::trim(s);
  std::size_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
    throw ParseError("not a non-negative integer: '" + std::string(s) + "'");
  }
  return v;
}

inline std::vector<double> parse_doubles(std::string_view s, char sep = ',') {
  std::vector<double> out;
  s = detail::trim(s);
  if (s.empty()) return out;
  for (auto item : detail::split_top(s, sep)) out.push_back(parse_double(item));
  return out;
}

// Space descriptors: "euclidean 2", "hyperbolic 3", "spider 4",
// "product(euclidean 1; spider 3)".

inline std::string format_descriptor(const SpaceDescriptor& d) {
  switch (d.kind) {
    case SpaceKind::euclidean:
      return "euclidean " + std::to_string(d.dim);
    case SpaceKind::hyperbolic:
      return "hyperbolic " + std::to_string(d.dim);
    case SpaceKind::spider:
      return "spider " + std::to_string(d.dim);
    case SpaceKind::product: {
      std::string s = "product(";
      for (std::size_t i = 0; i < d.factors.size(); ++i) {
        if (i) s += "; ";
        s += format_descriptor(d.factors[i]);
      }
      return s + ")";
    }
  }
  return {};
}

inline SpaceDescriptor parse_descriptor(std::string_view text) {
  text = detail::trim(text);
  if (text.rfind("product", 0) == 0) {
    std::vector<SpaceDescriptor> factors;
    for (auto f : detail::split_top(detail::strip_parens(text.substr(7)), ';')) {
      factors.push_back(parse_descriptor(f));
    }
    return SpaceDescriptor::product(std::move(factors));
  }
  const auto space = text.find_first_of(" \t");
  if (space == std::string_view::npos) {
    throw ParseError("space descriptor needs a kind and a size: '" + std::string(text) + "'");
  }
  const auto kind = text.substr(0, space);
  const std::size_t n = parse_count(text.substr(space + 1));
  try {
    if (kind == "euclidean") return SpaceDescriptor::euclidean(n);
    if (kind == "hyperbolic") return SpaceDescriptor::hyperbolic(n);
    if (kind == "spider") return SpaceDescriptor::spider(n);
  } catch (const StructuralError& e) {
    throw ValidationError(e.what());
  }
  throw ParseError("unknown space kind '" + std::string(kind) + "'");
}

// Points: "euclidean:v1,...,vn", "hyperbolic:x0,...,xn", "spider:leg,r",
// "product:(...);(...)".

inline std::string format_point(const Space& space, const Point& p) {
  auto join = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ',';
      s += format_double(v[i]);
    }
    return s;
  };
  space.check(p);
  switch (space.kind()) {
    case SpaceKind::euclidean:
      return "euclidean:" + join(p.coords());
    case SpaceKind::hyperbolic:
      return "hyperbolic:" + join(p.coords());
    case SpaceKind::spider:
      return "spider:" + std::to_string(p.spider().leg) + "," + format_double(p.spider().radius);
    case SpaceKind::product: {
      std::string s = "product:";
      for (std::size_t i = 0; i < space.factors().size(); ++i) {
        if (i) s += ';';
        s += "(" + format_point(space.factors()[i], p.parts()[i]) + ")";
      }
      return s;
    }
  }
  return {};
}

inline Point parse_point(const Space& space, std::string_view text) {
  text = detail::trim(text);
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ParseError("point needs a '<kind>:' prefix: '" + std::string(text) + "'");
  }
  const auto kind = text.substr(0, colon);
  const auto body = text.substr(colon + 1);
  auto expect = [&](std::string_view k) {
    if (kind != k) {
      throw ParseError("expected a " + std::string(k) + " point, got '" + std::string(text) + "'");
    }
  };
  Point p;
  switch (space.kind()) {
    case SpaceKind::euclidean:
      expect("euclidean");
      p = Point(parse_doubles(body));
      break;
    case SpaceKind::hyperbolic: {
      expect("hyperbolic");
      auto x = parse_doubles(body);
      Point raw(x);
      try {
        space.check(raw);
      } catch (const StructuralError& e) {
        throw ValidationError(std::string(e.what()) + ": '" + std::string(text) + "'");
      }
      detail::hyperboloid_normalize(x);
      p = Point(std::move(x));
      break;
    }
    case SpaceKind::spider: {
      expect("spider");
      const auto items = detail::split_top(body, ',');
      if (items.size() != 2) throw ParseError("spider point needs 'leg,r': '" + std::string(text) + "'");
      p = spider_point(parse_count(items[0]), parse_double(items[1]));
      break;
    }
    case SpaceKind::product: {
      expect("product");
      const auto items = detail::split_top(body, ';');
      if (items.size() != space.factors().size()) {
        throw ParseError("product point has " + std::to_string(items.size()) + " parts, expected " +
                         std::to_string(space.factors().size()));
      }
      Point::Parts parts;
      for (std::size_t i = 0; i < items.size(); ++i) {
        parts.push_back(parse_point(space.factors()[i], detail::strip_parens(items[i])));
      }
      p = Point(std::move(parts));
      break;
    }
  }
  try {
    space.check(p);
  } catch (const StructuralError& e) {
    throw ValidationError(std::string(e.what()) + ": '" + std::string(text) + "'");
  }
  return p;
}

}  // namespace hadamard
