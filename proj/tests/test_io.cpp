#include "doctest.h"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "addwalk/io.hpp"

using namespace addwalk;

namespace {

ExperimentManifest fixed_manifest() {
  ExperimentManifest m;
  m.subcommand = "demo";
  m.seed = 1729;
  m.timestamp = "2026-01-01T00:00:00Z";
  return m;
}

// Header lines all start with '#'; the payload is everything after them.
std::string strip_header(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace

TEST_CASE("doubles render with round-trip precision") {
  CHECK_EQ(format_double(0.5), "0.5");
  CHECK_EQ(format_double(-3.0), "-3");
  // Parse-back yields the identical bit pattern: 17 significant digits.
  for (double v : {0.1, 1.0 / 3.0, 6.283185307179586, 1e-300, -9.99e200}) {
    CHECK_EQ(std::stod(format_double(v)), v);
  }
  CHECK_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("manifest parameter bookkeeping") {
  ExperimentManifest m = fixed_manifest();
  m.add("n", std::int64_t(100));
  m.add("model", "lazy-simple");
  m.add("bn", 84.83);
  m.add("flag", true);
  CHECK_EQ(m.get("n"), "100");
  CHECK_EQ(m.get("model"), "lazy-simple");
  CHECK_EQ(m.get("flag"), "true");
  CHECK_EQ(m.get("missing"), "");
  // Re-adding a key updates it in place (resolved values overwrite defaults)
  // and does not duplicate the header line.
  m.add("n", std::int64_t(200));
  CHECK_EQ(m.get("n"), "200");
  int n_lines = 0;
  std::istringstream in(manifest_header(m));
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# n = ", 0) == 0) ++n_lines;
  }
  CHECK_EQ(n_lines, 1);
}

TEST_CASE("header block shape") {
  ExperimentManifest m = fixed_manifest();
  m.add("p", 2);
  const std::string header = manifest_header(m);
  // Every line '#'-prefixed, ending with a newline.
  CHECK(!header.empty());
  CHECK_EQ(header.back(), '\n');
  std::istringstream in(header);
  std::string line;
  bool saw_version = false, saw_seed = false, saw_sub = false, saw_time = false,
       saw_param = false;
  while (std::getline(in, line)) {
    REQUIRE(!line.empty());
    REQUIRE_EQ(line[0], '#');
    if (line.find(kCodeVersion) != std::string::npos) saw_version = true;
    if (line.find("seed: 1729") != std::string::npos) saw_seed = true;
    if (line.find("subcommand: demo") != std::string::npos) saw_sub = true;
    if (line.find("2026-01-01T00:00:00Z") != std::string::npos) saw_time = true;
    if (line.find("p = 2") != std::string::npos) saw_param = true;
  }
  CHECK(saw_version);
  CHECK(saw_seed);
  CHECK(saw_sub);
  CHECK(saw_time);
  CHECK(saw_param);
  // The timestamp is the ONLY field that may differ between reruns: two
  // manifests differing only in timestamp render headers differing only on
  // the timestamp line.
  ExperimentManifest m2 = m;
  m2.timestamp = "2026-02-02T00:00:00Z";
  std::istringstream a(manifest_header(m)), b(manifest_header(m2));
  std::string la, lb;
  int diff_lines = 0;
  while (std::getline(a, la) && std::getline(b, lb)) {
    if (la != lb) {
      ++diff_lines;
      CHECK(lb.find("2026-02-02") != std::string::npos);
    }
  }
  CHECK_EQ(diff_lines, 1);
}

TEST_CASE("timestamps are stamped in ISO-8601 UTC") {
  const ExperimentManifest m = make_manifest("demo", 7);
  REQUIRE_EQ(m.timestamp.size(), std::size_t(20));
  CHECK_EQ(m.timestamp[4], '-');
  CHECK_EQ(m.timestamp[10], 'T');
  CHECK_EQ(m.timestamp.back(), 'Z');
  CHECK_EQ(m.subcommand, "demo");
  CHECK_EQ(m.seed, std::uint64_t(7));
}

TEST_CASE("csv rendering: header, columns, quoting") {
  ExperimentManifest m = fixed_manifest();
  OutputTable t;
  t.columns = {"a", "b"};
  t.row({"1", "plain"});
  t.row({"2.5", "needs,quote"});
  t.row({"3", "has \"inner\" quotes"});
  const std::string text = render_csv(m, t);
  const std::string body = strip_header(text);
  CHECK_EQ(body,
           "a,b\n"
           "1,plain\n"
           "2.5,\"needs,quote\"\n"
           "3,\"has \"\"inner\"\" quotes\"\n");
  CHECK_THROWS_AS(t.row({"only-one"}), std::logic_error);
}

TEST_CASE("json rendering: numbers stay verbatim, strings are escaped") {
  ExperimentManifest m = fixed_manifest();
  OutputTable t;
  t.columns = {"x", "note"};
  // 128-bit exact integer far beyond double precision: must appear verbatim.
  t.row({"170141183460469231731687303715884105727", "big"});
  t.row({"-2.5e-3", "sci"});
  t.row({"007", "leading zero is NOT a JSON number"});
  t.row({"nan", "non-finite stays quoted"});
  t.row({"1.0", "tab\there \"q\""});
  const std::string text = render_json(m, t);
  const std::string body = strip_header(text);
  CHECK(body.find("170141183460469231731687303715884105727,") !=
        std::string::npos);
  CHECK(body.find("\"170141183460469231731687303715884105727\"") ==
        std::string::npos);
  CHECK(body.find("-2.5e-3") != std::string::npos);
  CHECK(body.find("\"007\"") != std::string::npos);
  CHECK(body.find("\"nan\"") != std::string::npos);
  CHECK(body.find("\"tab\\there \\\"q\\\"\"") != std::string::npos);
  CHECK(body.find("\"columns\"") != std::string::npos);
  CHECK(body.find("\"rows\"") != std::string::npos);
  // The payload below the header must be valid JSON-shaped text: balanced
  // braces on the outside.
  CHECK_EQ(body.front(), '{');
  CHECK_EQ(body[body.size() - 2], '}');  // final newline after the document
}

TEST_CASE("bespoke documents ride below the same header") {
  ExperimentManifest m = fixed_manifest();
  const std::string text = render_with_header(m, "{\"ok\": true}\n");
  CHECK_EQ(strip_header(text), "{\"ok\": true}\n");
  CHECK_EQ(text.find("# "), std::size_t(0));
}

TEST_CASE("file output") {
  const std::string path = "io_test_output.tmp";
  write_output(path, "payload\n");
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK_EQ(buf.str(), "payload\n");
  std::remove(path.c_str());
  CHECK_THROWS_AS(write_output("no/such/dir/x.csv", "y"), std::runtime_error);
}
