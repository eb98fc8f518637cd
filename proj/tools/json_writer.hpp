#pragma once

// Minimal ordered JSON writer for the output artifacts. Keys keep
// insertion order and doubles are serialized with 17 significant digits
// so artifacts are bit-stable and round-trip exactly.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace gsest::tools {

class JsonValue;
using JsonArray = std::vector<JsonValue>;

class JsonObject {
 public:
  JsonObject& set(const std::string& key, JsonValue value);
  const std::vector<std::pair<std::string, JsonValue>>& members() const {
    return members_;
  }

 private:
  std::vector<std::pair<std::string, JsonValue>> members_;
};

class JsonValue {
 public:
  JsonValue() : data_(nullptr) {}
  JsonValue(std::nullptr_t) : data_(nullptr) {}
  JsonValue(bool b) : data_(b) {}
  JsonValue(double d) : data_(d) {}
  JsonValue(int i) : data_(static_cast<std::int64_t>(i)) {}
  JsonValue(std::int64_t i) : data_(i) {}
  JsonValue(std::uint64_t u) : data_(u) {}
  JsonValue(const char* s) : data_(std::string(s)) {}
  JsonValue(std::string s) : data_(std::move(s)) {}
  JsonValue(JsonArray a) : data_(std::move(a)) {}
  JsonValue(JsonObject o) : data_(std::move(o)) {}

  void dump(std::string& out, int indent, int depth) const;

 private:
  std::variant<std::nullptr_t, bool, double, std::int64_t, std::uint64_t,
               std::string, JsonArray, JsonObject>
      data_;
};

inline JsonObject& JsonObject::set(const std::string& key, JsonValue value) {
  members_.emplace_back(key, std::move(value));
  return *this;
}

namespace detail {

inline void append_escaped(std::string& out, const std::string& s) {
  out.push_back('"');
  for (const char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\r':
        out += "\\r";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  out.push_back('"');
}

inline void append_indent(std::string& out, int indent, int depth) {
  if (indent > 0) {
    out.push_back('\n');
    out.append(static_cast<std::size_t>(indent) * depth, ' ');
  }
}

}  // namespace detail

inline void JsonValue::dump(std::string& out, int indent, int depth) const {
  struct Visitor {
    std::string& out;
    int indent;
    int depth;

    void operator()(std::nullptr_t) const { out += "null"; }
    void operator()(bool b) const { out += b ? "true" : "false"; }
    void operator()(double d) const {
      if (!std::isfinite(d)) {
        out += "null";  // JSON has no infinities
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", d);
      out += buf;
    }
    void operator()(std::int64_t i) const { out += std::to_string(i); }
    void operator()(std::uint64_t u) const { out += std::to_string(u); }
    void operator()(const std::string& s) const {
      detail::append_escaped(out, s);
    }
    void operator()(const JsonArray& a) const {
      if (a.empty()) {
        out += "[]";
        return;
      }
      out.push_back('[');
      bool first = true;
      for (const auto& v : a) {
        if (!first) {
          out.push_back(',');
        }
        first = false;
        detail::append_indent(out, indent, depth + 1);
        v.dump(out, indent, depth + 1);
      }
      detail::append_indent(out, indent, depth);
      out.push_back(']');
    }
    void operator()(const JsonObject& o) const {
      if (o.members().empty()) {
        out += "{}";
        return;
      }
      out.push_back('{');
      bool first = true;
      for (const auto& [key, value] : o.members()) {
        if (!first) {
          out.push_back(',');
        }
        first = false;
        detail::append_indent(out, indent, depth + 1);
        detail::append_escaped(out, key);
        out += indent > 0 ? ": " : ":";
        value.dump(out, indent, depth + 1);
      }
      detail::append_indent(out, indent, depth);
      out.push_back('}');
    }
  };
  std::visit(Visitor{out, indent, depth}, data_);
}

inline std::string dump_json(const JsonObject& root, int indent = 2) {
  std::string out;
  JsonValue(root).dump(out, indent, 0);
  out.push_back('\n');
  return out;
}

}  // namespace gsest::tools
