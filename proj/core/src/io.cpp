#include "addwalk/io.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace addwalk {
namespace {

std::string iso_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

// Matches the JSON number grammar: -?(0|[1-9][0-9]*)(\.[0-9]+)?([eE][+-]?[0-9]+)?
// Cells that match are emitted into JSON verbatim, so exact integer digits
// (which may exceed 64 bits) and %.17g floats survive without re-rounding.
bool is_json_number(const std::string& s) {
  std::size_t i = 0;
  const std::size_t n = s.size();
  if (i < n && s[i] == '-') ++i;
  if (i >= n) return false;
  if (s[i] == '0') {
    ++i;
  } else if (s[i] >= '1' && s[i] <= '9') {
    while (i < n && s[i] >= '0' && s[i] <= '9') ++i;
  } else {
    return false;
  }
  if (i < n && s[i] == '.') {
    ++i;
    if (i >= n || s[i] < '0' || s[i] > '9') return false;
    while (i < n && s[i] >= '0' && s[i] <= '9') ++i;
  }
  if (i < n && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < n && (s[i] == '+' || s[i] == '-')) ++i;
    if (i >= n || s[i] < '0' || s[i] > '9') return false;
    while (i < n && s[i] >= '0' && s[i] <= '9') ++i;
  }
  return i == n;
}

void append_json_string(std::string& out, const std::string& s) {
  out += '"';
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void append_csv_cell(std::string& out, const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) {
    out += cell;
    return;
  }
  out += '"';
  for (const char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

}  // namespace

void ExperimentManifest::add(const std::string& key, const std::string& value) {
  for (auto& kv : params) {
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  }
  params.emplace_back(key, value);
}

void ExperimentManifest::add(const std::string& key, const char* value) {
  add(key, std::string(value));
}

void ExperimentManifest::add(const std::string& key, double value) {
  add(key, format_double(value));
}

void ExperimentManifest::add(const std::string& key, std::int64_t value) {
  add(key, std::to_string(value));
}

void ExperimentManifest::add(const std::string& key, std::uint64_t value) {
  add(key, std::to_string(value));
}

void ExperimentManifest::add(const std::string& key, int value) {
  add(key, std::to_string(value));
}

void ExperimentManifest::add(const std::string& key, bool value) {
  add(key, std::string(value ? "true" : "false"));
}

std::string ExperimentManifest::get(const std::string& key) const {
  for (const auto& kv : params) {
    if (kv.first == key) return kv.second;
  }
  return {};
}

ExperimentManifest make_manifest(const std::string& subcommand,
                                 std::uint64_t seed) {
  ExperimentManifest m;
  m.subcommand = subcommand;
  m.seed = seed;
  m.timestamp = iso_utc_now();
  return m;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string manifest_header(const ExperimentManifest& m) {
  std::string out;
  out += "# ";
  out += m.code_version;
  out += "\n# subcommand: ";
  out += m.subcommand;
  out += "\n# seed: ";
  out += std::to_string(m.seed);
  out += "\n# timestamp: ";
  out += m.timestamp;
  out += '\n';
  for (const auto& kv : m.params) {
    out += "# ";
    out += kv.first;
    out += " = ";
    out += kv.second;
    out += '\n';
  }
  return out;
}

void OutputTable::row(std::vector<std::string> cells) {
  if (cells.size() != columns.size()) {
    throw std::logic_error("row width does not match the column count");
  }
  rows.push_back(std::move(cells));
}

std::string render_csv(const ExperimentManifest& m, const OutputTable& t) {
  std::string out = manifest_header(m);
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c > 0) out += ',';
    append_csv_cell(out, t.columns[c]);
  }
  out += '\n';
  for (const auto& r : t.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c > 0) out += ',';
      append_csv_cell(out, r[c]);
    }
    out += '\n';
  }
  return out;
}

std::string render_json(const ExperimentManifest& m, const OutputTable& t) {
  std::string body = "{\n  \"columns\": [";
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c > 0) body += ", ";
    append_json_string(body, t.columns[c]);
  }
  body += "],\n  \"rows\": [";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    body += (r == 0) ? "\n    [" : ",\n    [";
    const auto& row = t.rows[r];
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) body += ", ";
      if (is_json_number(row[c])) {
        body += row[c];
      } else {
        append_json_string(body, row[c]);
      }
    }
    body += ']';
  }
  body += t.rows.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return body.insert(0, manifest_header(m));
}

std::string render_with_header(const ExperimentManifest& m,
                               const std::string& body) {
  return manifest_header(m) + body;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::fwrite(content.data(), 1, content.size(), stdout);
    std::fflush(stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out.write(content.data(), std::streamsize(content.size()));
  if (!out) throw std::runtime_error("failed writing output file: " + path);
}

}  // namespace addwalk
