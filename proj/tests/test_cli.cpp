#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "ising/model_io.hpp"
#include "ising/testkit.hpp"

using namespace ising;

namespace {

#ifndef ISING_CLI_PATH
#define ISING_CLI_PATH "./ising"
#endif

int run_cli(const std::string& args, std::string* out = nullptr) {
  const std::string tmp = "/tmp/ising_cli_test_out.txt";
  const std::string cmd = std::string(ISING_CLI_PATH) + " " + args + " > " + tmp + " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  if (out) {
    std::ifstream in(tmp);
    std::ostringstream ss;
    ss << in.rdbuf();
    *out = ss.str();
  }
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("model file parsing: fixtures and named errors") {
  auto m = parse_model_file(R"({"num_vertices": 2, "edges": [{"u":0,"v":1,"j":0.5}]})");
  CHECK(m.graph.num_vertices() == 2);
  CHECK(m.graph.num_edges() == 1);
  CHECK(m.coupling[0] == 0.5);

  auto kind_of = [](const std::string& text) {
    try {
      parse_model_file(text);
    } catch (const ModelParseError& e) {
      return e.kind();
    }
    throw std::runtime_error("expected a parse error");
  };
  CHECK(kind_of(R"({"num_vertices": 2, "edges": [{"u":0,"v":1,"j":1},{"u":1,"v":0,"j":2}]})") ==
        ModelParseErrorKind::DuplicateEdge);
  CHECK(kind_of(R"({"num_vertices": 2, "edges": [{"u":0,"v":0,"j":1}]})") ==
        ModelParseErrorKind::SelfLoop);
  CHECK(kind_of(R"({"num_vertices": 2, "edges": [{"u":0,"v":5,"j":1}]})") ==
        ModelParseErrorKind::OutOfRangeIndex);
  CHECK(kind_of(R"({"num_vertices": 2})") == ModelParseErrorKind::MalformedField);
  CHECK(kind_of("not json at all") == ModelParseErrorKind::MalformedField);
}

TEST_CASE("writer round-trips bit-exactly on generated models") {
  for (int t = 0; t < 10; ++t) {
    auto m = testkit::gen_random_k33free({8 + t, 0.37, 100u + static_cast<std::uint64_t>(t)});
    const std::string text = write_model_file(m);
    const IsingModel back = parse_model_file(text);
    CHECK(write_model_file(back) == text);
    CHECK(back.graph.num_vertices() == m.graph.num_vertices());
    CHECK(back.graph.num_edges() == m.graph.num_edges());
    CHECK(infer_log_z(back) == doctest::Approx(infer_log_z(m)).epsilon(1e-12));
  }
}

TEST_CASE("cli: infer output, determinism, exit codes") {
  save_model(parse_model_file(R"({"num_vertices": 2, "edges": [{"u":0,"v":1,"j":0.5}]})"),
             "/tmp/ising_cli_edge.json");
  std::string out;
  CHECK(run_cli("infer --model /tmp/ising_cli_edge.json", &out) == 0);
  CHECK(out.substr(0, 13) == "1.50640886808");  // log(4 cosh 0.5), 12 digits

  CHECK(run_cli("gen --kind k33free --size 14 --seed 5 --out /tmp/ising_cli_m.json") == 0);
  std::string s1, s2;
  CHECK(run_cli("sample --model /tmp/ising_cli_m.json --num-samples 3 --seed 7", &s1) == 0);
  CHECK(run_cli("sample --model /tmp/ising_cli_m.json --num-samples 3 --seed 7", &s2) == 0);
  CHECK(s1 == s2);
  CHECK(!s1.empty());

  CHECK(run_cli("bogus-subcommand") == 2);
  CHECK(run_cli("infer --model /tmp/definitely_missing.json") == 3);
  // K6 is outside the tractable family at the default bound.
  {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j) e.emplace_back(i, j);
    save_model(IsingModel{Graph(6, e), std::vector<double>(15, 0.1)}, "/tmp/ising_cli_k6.json");
    CHECK(run_cli("infer --model /tmp/ising_cli_k6.json") == 4);
    CHECK(run_cli("infer --model /tmp/ising_cli_k6.json --nonplanar-bound 6") == 0);
  }
}

TEST_CASE("cli: kltest and bench emit well-formed tables") {
  std::string out;
  CHECK(run_cli("kltest --size 8 --sample-counts 500,2000 --seed 3", &out) == 0);
  CHECK(out.rfind("m\tKL\n", 0) == 0);
  int rows = 0;
  for (const char c : out)
    if (c == '\n') ++rows;
  CHECK(rows == 3);

  CHECK(run_cli("bench --sizes 64,128 --seed 2", &out) == 0);
  CHECK(out.rfind("N\tinfer_ms\tsample_ms\n", 0) == 0);
}
