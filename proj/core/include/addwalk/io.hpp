// Output plumbing shared by every command-line tool: run manifests, the
// '#'-prefixed header block, number formatting, and table rendering.
//
// Every output file starts with a header block whose lines begin with '#'.
// The header echoes the fully-resolved run (subcommand, every parameter,
// master seed, code version) plus a wall-clock timestamp.  The timestamp is
// the only non-reproducible field and it lives in the header alone: re-running
// the same manifest reproduces every byte below the header, at any worker
// count.  JSON outputs carry the same '#' header above the JSON document;
// strip lines starting with '#' before handing the payload to a JSON parser.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace addwalk {

// Version stamp echoed into output headers.
inline constexpr const char* kCodeVersion = "addwalk 0.1.0";

// Fully-resolved description of one run.  `params` preserves insertion order
// so headers are stable; keys are unique per manifest.
struct ExperimentManifest {
  std::string subcommand;
  std::uint64_t seed = 0;
  std::string code_version = kCodeVersion;
  std::string timestamp;  // ISO-8601 UTC; header-only, see file comment

  std::vector<std::pair<std::string, std::string>> params;

  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, const char* value);
  void add(const std::string& key, double value);
  void add(const std::string& key, std::int64_t value);
  void add(const std::string& key, std::uint64_t value);
  void add(const std::string& key, int value);
  void add(const std::string& key, bool value);

  // Value for `key`, or empty string when absent.
  std::string get(const std::string& key) const;
};

// Manifest stamped with the current UTC time.
ExperimentManifest make_manifest(const std::string& subcommand,
                                 std::uint64_t seed);

// Doubles are written with %.17g: enough digits to round-trip exactly, so
// "identical numbers" and "identical bytes" coincide.
std::string format_double(double v);

// '#'-prefixed header block echoing the manifest; ends with a newline.
std::string manifest_header(const ExperimentManifest& m);

// A rectangular table of pre-formatted cells.
struct OutputTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  // Appends a row; the argument count must match `columns`.
  void row(std::vector<std::string> cells);
};

// Header block, then "col1,col2,...", then one line per row.
std::string render_csv(const ExperimentManifest& m, const OutputTable& t);

// Header block, then a JSON document {"columns": [...], "rows": [[...]]}.
// Cells that parse as JSON numbers are emitted as numbers (non-finite values
// stay quoted), everything else as strings.
std::string render_json(const ExperimentManifest& m, const OutputTable& t);

// Header block, then `body` verbatim (used for bespoke JSON reports).
std::string render_with_header(const ExperimentManifest& m,
                               const std::string& body);

// Writes `content` to `path`, or to stdout when `path` is empty or "-".
void write_output(const std::string& path, const std::string& content);

}  // namespace addwalk
