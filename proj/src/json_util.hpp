#pragma once

// Strict JSON object reading with field paths in error messages.

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pdpp/error.hpp"

namespace pdpp::detail {

using Json = nlohmann::json;

inline Json parse_json(std::string_view text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InvalidInput(what + ": JSON parse error: " + e.what());
  }
}

/// Reads fields of one JSON object; finish() rejects any field not read.
class ObjectReader {
 public:
  ObjectReader(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_, "expected an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    if (!obj_.contains(key)) fail(at(key), "missing required field");
    return obj_.at(key);
  }

  double number(const std::string& key) { return as_number(raw(key), at(key)); }
  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : (seen_.insert(key), fallback);
  }

  std::uint64_t unsigned_int(const std::string& key) { return as_unsigned(raw(key), at(key)); }
  std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) {
    return has(key) ? unsigned_int(key) : (seen_.insert(key), fallback);
  }

  std::string string(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : (seen_.insert(key), fallback);
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return seen_.insert(key), fallback;
    const Json& v = raw(key);
    if (!v.is_boolean()) fail(at(key), "expected a boolean");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array()) fail(at(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(as_number(v[i], at(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  std::vector<std::uint64_t> unsigned_ints(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array()) fail(at(key), "expected an array of integers");
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(as_unsigned(v[i], at(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array()) fail(at(key), "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) fail(at(key) + "[" + std::to_string(i) + "]", "expected a string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }

  std::string at(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.contains(it.key())) fail(at(it.key()), "unknown field");
    }
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
    throw InvalidInput(path + ": " + msg);
  }

 private:
  static double as_number(const Json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "expected a finite number");
    return x;
  }

  static std::uint64_t as_unsigned(const Json& v, const std::string& path) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<std::int64_t>() < 0)) {
      fail(path, "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  const Json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace pdpp::detail
