#include <charconv>
#include <cmath>
#include <string>

#include "arveson/io.hpp"

namespace arveson {

namespace {

bool is_scalar(const nlohmann::json& v) { return !v.is_array() && !v.is_object(); }

void write_value(const nlohmann::json& v, int depth, std::string& out);

void newline(int depth, std::string& out) {
  out += '\n';
  out.append(static_cast<std::size_t>(2 * depth), ' ');
}

void write_scalar(const nlohmann::json& v, std::string& out) {
  switch (v.type()) {
    case nlohmann::json::value_t::number_float:
      out += format_number(v.get<double>());
      break;
    case nlohmann::json::value_t::null:
    case nlohmann::json::value_t::boolean:
    case nlohmann::json::value_t::number_integer:
    case nlohmann::json::value_t::number_unsigned:
    case nlohmann::json::value_t::string:
      out += v.dump();
      break;
    default:
      throw InvalidArgument("unsupported JSON value in canonical writer");
  }
}

void write_value(const nlohmann::json& v, int depth, std::string& out) {
  if (v.is_object()) {
    if (v.empty()) {
      out += "{}";
      return;
    }
    // nlohmann::json stores objects in a std::map, so iteration is already
    // in bytewise key order.
    out += '{';
    bool first = true;
    for (const auto& [key, item] : v.items()) {
      if (!first) out += ',';
      first = false;
      newline(depth + 1, out);
      out += nlohmann::json(key).dump();
      out += ": ";
      write_value(item, depth + 1, out);
    }
    newline(depth, out);
    out += '}';
  } else if (v.is_array()) {
    bool flat = true;
    for (const auto& item : v) flat = flat && is_scalar(item);
    out += '[';
    if (flat) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        write_scalar(v[i], out);
      }
      out += ']';
      return;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ',';
      newline(depth + 1, out);
      write_value(v[i], depth + 1, out);
    }
    newline(depth, out);
    out += ']';
  } else {
    write_scalar(v, out);
  }
}

}  // namespace

std::string format_number(double value) {
  if (!std::isfinite(value)) throw InvalidArgument("non-finite value cannot be written as JSON");
  // "-0" would re-parse as the integer 0 and lose the sign.
  if (value == 0.0 && std::signbit(value)) return "-0.0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string canonical_json(const nlohmann::json& value) {
  std::string out;
  write_value(value, 0, out);
  out += '\n';
  return out;
}

}  // namespace arveson
