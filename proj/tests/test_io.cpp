#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "arveson/cli.hpp"
#include "arveson/io.hpp"
#include "support.hpp"

using namespace arveson;
using namespace arveson::testing;

namespace {

std::string schema_message(std::string_view text) {
  try {
    parse_matrix(text);
  } catch (const SchemaError& e) {
    return e.what();
  }
  return "";
}

SimilarityReport<double> sample_report(Verdict verdict) {
  SimilarityReport<double> r;
  r.verdict = verdict;
  r.plan = SamplePlan{2, 8, 7, 16};
  r.max_invariant_gap = 0.1;
  r.commutant_dims = {1, 2};
  Rng rng(61);
  if (verdict == Verdict::similar) r.unitary = random_unitary<double>(2, rng);
  if (verdict == Verdict::not_similar)
    r.witness = InvariantWitness<double>{random_gaussian<double>(2, 2, rng), random_gaussian<double>(2, 2, rng),
                                         1.0 / 3.0, 2.0 / 7.0, 0};
  return r;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("parse_matrix") {
    const ComplexMatrix one = parse_matrix(R"({"n":1,"re":[[2]],"im":[[0]]})");
    CHECK(one.rows() == 1);
    CHECK(one(0, 0) == std::complex<double>(2.0, 0.0));

    const ComplexMatrix j = parse_matrix(R"({"n":2,"re":[[0,1],[0,0]],"im":[[0,0],[0,0]]})");
    CHECK((j - mat({{0.0, 1.0}, {0.0, 0.0}})).norm() == 0.0);

    const ComplexMatrix c = parse_matrix(R"({"n":2,"re":[[1,2],[3,4]],"im":[[5,6],[7,8]]})");
    CHECK(c(1, 0) == std::complex<double>(3.0, 7.0));

    CHECK(schema_message(R"({"n":2,"re":[[0]],"im":[[0,0],[0,0]]})").find("re[0]") != std::string::npos);
    CHECK(schema_message(R"({"n":2,"re":[[0,0],[0,0]],"im":[[0,0],[0,"x"]]})").find("im[1][1]") !=
          std::string::npos);
    CHECK(schema_message(R"({"n":2,"re":[[0,0],[0,0]],"im":[[0,0],[0,0],[0,0]]})").find("im") != std::string::npos);
    CHECK(schema_message(R"({"re":[[0]],"im":[[0]]})").find("n") != std::string::npos);
    CHECK(schema_message(R"({"n":1,"im":[[0]]})").find("re") != std::string::npos);
    CHECK(schema_message(R"({"n":0,"re":[],"im":[]})").find("n") != std::string::npos);
    CHECK(schema_message(R"([1,2])").find("object") != std::string::npos);
    CHECK_THROWS_AS(parse_matrix(R"({"n":1,"re":[[1]],)"), ParseError);
    CHECK_THROWS_AS(parse_matrix(""), ParseError);
    // JSON has no non-finite literals; overflowing ones fail while lexing.
    CHECK_THROWS_AS(parse_matrix(R"({"n":1,"re":[[1e999]],"im":[[0]]})"), ParseError);
  }

  TEST_CASE("matrices round-trip exactly") {
    Rng rng(62);
    for (int t = 0; t < 20; ++t) {
      ComplexMatrix m = random_gaussian<double>(3, 3, rng);
      m(0, 0) = std::complex<double>(std::numeric_limits<double>::denorm_min(), -0.0);
      m(1, 1) = std::complex<double>(std::numeric_limits<double>::max(), 1e-300);
      const ComplexMatrix back = parse_matrix(write_matrix(m));
      CHECK(same_matrix(back, m));
      CHECK(std::signbit(back(0, 0).imag()));
    }
  }

  TEST_CASE("canonical formatting") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(2.0) == "2");
    CHECK(format_number(-0.0) == "-0.0");
    CHECK(format_number(1e-300) == "1e-300");
    CHECK(format_number(1.0 / 3.0) == "0.33333333333333331");
    CHECK_THROWS_AS(format_number(std::numeric_limits<double>::infinity()), InvalidArgument);
    const nlohmann::json doc = {{"b", 1}, {"a", {{"z", 0.5}, {"c", nlohmann::json::array({1, 2})}}}, {"B", "x"}};
    CHECK(canonical_json(doc) ==
          "{\n  \"B\": \"x\",\n  \"a\": {\n    \"c\": [1, 2],\n    \"z\": 0.5\n  },\n  \"b\": 1\n}\n");
    CHECK(write_matrix(mat({{1.0}})) == "{\n  \"im\": [\n    [0]\n  ],\n  \"n\": 1,\n  \"re\": [\n    [1]\n  ]\n}\n");
  }

  TEST_CASE("reports") {
    for (Verdict v : {Verdict::similar, Verdict::not_similar, Verdict::inconclusive}) {
      const auto report = sample_report(v);
      const std::string text = write_report(report, ReportFormat::json);
      const ReportFile parsed = parse_report(text);
      CHECK(parsed == to_report_file(report));
      CHECK(write_report(parsed, ReportFormat::json) == text);
      CHECK((text.find("\"unitary\"") != std::string::npos) == (v == Verdict::similar));
      CHECK((text.find("\"witness\"") != std::string::npos) == (v == Verdict::not_similar));
      CHECK(text.find("\"tool_version\"") != std::string::npos);
      const std::string human = write_report(report, ReportFormat::text);
      CHECK(human.rfind(std::string("verdict: ") + to_string(v), 0) == 0);
    }
    auto doc = report_to_json(to_report_file(sample_report(Verdict::similar)));
    doc["verdict"] = "not_similar";
    CHECK_THROWS_AS(report_from_json(doc), SchemaError);
    doc["verdict"] = "maybe";
    CHECK_THROWS_AS(report_from_json(doc), SchemaError);
    doc = report_to_json(to_report_file(sample_report(Verdict::inconclusive)));
    doc.erase("plan");
    CHECK_THROWS_AS(report_from_json(doc), SchemaError);
  }
}

namespace {

struct Workspace {
  std::filesystem::path dir;
  Workspace() {
    dir = std::filesystem::temp_directory_path() / ("arveson-cli-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
  }
  ~Workspace() { std::filesystem::remove_all(dir); }
  std::string put(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  }
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("exit codes") {
    Workspace ws;
    const auto a = ws.put("a.json", write_matrix(mat({{1.0, 2.0}, {0.0, 3.0}})));
    const auto b = ws.put("b.json", write_matrix(mat({{3.0, 0.0}, {2.0, 1.0}})));
    const auto d = ws.put("d.json", write_matrix(mat({{1.0, 0.0}, {0.0, 2.0}})));
    const auto d2 = ws.put("d2.json", write_matrix(mat({{2.0, 0.0}, {0.0, 1.0}})));
    const auto ragged = ws.put("ragged.json", R"({"n":2,"re":[[0]],"im":[[0,0],[0,0]]})");
    const auto broken = ws.put("broken.json", "{");
    const auto half = ws.put("half.json", write_matrix(ComplexMatrix(0.5 * ComplexMatrix::Identity(4, 4))));
    const auto swap = ws.put("swap.json", write_matrix(choi(transpose_map(2)).c));
    const auto three = ws.put("three.json", write_matrix(ComplexMatrix::Identity(3, 3)));

    auto similar = run({"check-sim", a, b});
    CHECK(similar.code == exit_code::kSuccess);
    CHECK(parse_report(similar.out).verdict == "similar");
    CHECK(run({"check-sim", a, d}).code == exit_code::kNegative);
    CHECK(run({"check-sim", d, d2}).code == exit_code::kInconclusive);
    CHECK(run({"check-sim", a, ragged}).code == exit_code::kData);
    CHECK(run({"check-sim", a, broken}).code == exit_code::kData);
    CHECK(run({"check-sim", a, three}).code == exit_code::kData);
    CHECK(run({"check-sim", a, (ws.dir / "missing.json").string()}).code == exit_code::kUsage);
    CHECK(run({"check-sim", a}).code == exit_code::kUsage);
    CHECK(run({"check-sim", a, b, "--samples", "0"}).code == exit_code::kUsage);
    CHECK(run({"check-sim", a, b, "--format", "xml"}).code == exit_code::kUsage);
    CHECK(run({}).code == exit_code::kUsage);
    CHECK(run({"nonsense"}).code == exit_code::kUsage);
    CHECK(run({"--help"}).code == exit_code::kSuccess);
    CHECK(run({"--version"}).out.find(tool_version()) != std::string::npos);

    auto irreducible = run({"irreducible", d});
    CHECK(irreducible.code == exit_code::kNegative);
    CHECK(irreducible.out.find("\"commutant_dimension\": 2") != std::string::npos);
    CHECK(run({"irreducible", a}).code == exit_code::kSuccess);

    CHECK(run({"recover-unitary", a, b}).code == exit_code::kSuccess);
    CHECK(run({"recover-unitary", a, d}).code == exit_code::kNegative);
    CHECK(run({"kraus", swap}).code == exit_code::kNegative);
    CHECK(run({"kraus", a}).code == exit_code::kData);
    CHECK(run({"expectation", half}).code == exit_code::kSoftware);
    CHECK(run({"boundary-verify", d, "--trials", "2"}).code == exit_code::kNegative);
    CHECK(run({"boundary-verify", a, "--trials", "2"}).code == exit_code::kSuccess);
    CHECK(run({"invariants", a, "--samples", "4"}).code == exit_code::kSuccess);
    CHECK(run({"probe-remark", a, "--samples", "4"}).code == exit_code::kSuccess);
  }

  TEST_CASE("seeded runs are byte-identical") {
    Workspace ws;
    const auto a = ws.put("a.json", write_matrix(mat({{1.0, 2.0}, {0.0, 3.0}})));
    const auto d = ws.put("d.json", write_matrix(mat({{1.0, 0.0}, {0.0, 2.0}})));
    for (std::vector<std::string> args : {std::vector<std::string>{"check-sim", a, d, "--seed", "0x1234"},
                                          std::vector<std::string>{"invariants", a, "--samples", "5"},
                                          std::vector<std::string>{"boundary-verify", d, "--trials", "2"}}) {
      const auto first = run(args);
      const auto second = run(args);
      CHECK(first.out == second.out);
      CHECK(first.code == second.code);
    }
    const auto hex = run({"invariants", a, "--seed", "0x10", "--samples", "2"});
    const auto dec = run({"invariants", a, "--seed", "16", "--samples", "2"});
    CHECK(hex.out == dec.out);
  }
}
