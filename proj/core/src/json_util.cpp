#include "spkid/json_util.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "spkid/error.hpp"

namespace spkid {
namespace {

bool is_scalar(const nlohmann::json& j) { return !j.is_object() && !j.is_array(); }

void emit_number(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
  // Keep a marker of floatness so integral doubles reload as doubles.
  std::string_view s(buf);
  if (s.find_first_of(".eE") == std::string_view::npos) out += ".0";
}

void emit(std::string& out, const nlohmann::json& j, int depth) {
  const std::string pad(2 * depth, ' ');
  const std::string inner(2 * (depth + 1), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner;
        out += nlohmann::json(it.key()).dump();
        out += ": ";
        emit(out, it.value(), depth + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      bool flat = true;
      for (const auto& e : j) flat = flat && is_scalar(e);
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          emit(out, j[i], depth + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        emit(out, j[i], depth + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      emit_number(out, j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

std::string format_double(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string dump_json(const nlohmann::json& doc) {
  std::string out;
  emit(out, doc, 0);
  out += "\n";
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw Error(ErrorKind::format, "'" + path.string() + "': " + ex.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw Error(ErrorKind::io, "short write to '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace spkid
