#include <sstream>

#include "doctest.h"
#include "gridsigma/cli.hpp"
#include "gridsigma/text.hpp"
#include "support.hpp"

using gridsigma::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("generate with voltage magnitudes") {
  const auto dir = testsupport::scratch_dir("cli_voltage");
  const auto data = (dir / "data").string();
  auto r = call({"generate", "--samples", "32", "--voltage", "--out", data});
  REQUIRE(r.code == 0);
  const auto ds = gridsigma::scenario::load_dataset(dir / "data");
  CHECK(ds.layout.size() == 82);
  CHECK(ds.layout.entries.back().name == "V_14");
  r = call({"render", "--data", data});
  CHECK(r.code == 0);
  CHECK(r.out.find("82 features per sample") != std::string::npos);
  CHECK(r.out.find("[V] bus voltage magnitude (pu)") != std::string::npos);
  r = call({"run", "--data", data, "--agent", "reference"});
  CHECK(r.code == 0);
}

TEST_CASE("generate, run and report") {
  const auto dir = testsupport::scratch_dir("cli_basic");
  const auto data = (dir / "data").string();
  auto r = call({"generate", "--samples", "160", "--seed", "42", "--out", data});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("dataset.jsonl") != std::string::npos);
  CHECK(r.out.find("stats.json") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "data" / "meta.json"));

  r = call({"run", "--paradigm", "zero-shot", "--variant", "z_only", "--agent", "reference", "--data", data});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("Z_score") != std::string::npos);
  CHECK(r.out.find("wrote ") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "data" / "runs" / "zero-shot-z_only-reference.json"));

  r = call({"report", "--table", "variants", "--data", data, "--format", "md"});
  CHECK(r.code == 0);
  CHECK(r.out.find("| Z_score |") != std::string::npos);

  r = call({"stats", "--data", data});
  CHECK(r.code == 0);
  CHECK(r.out.find("P_1 | mean") != std::string::npos);

  r = call({"render", "--data", data, "--paradigm", "few-shot", "--variant", "value"});
  CHECK(r.code == 0);
  CHECK(r.out.find("Example 2:") != std::string::npos);

  r = call({"export-finetune", "--data", data});
  CHECK(r.code == 0);
  CHECK(gridsigma::text::split_lines(gridsigma::text::read_file((dir / "data" / "finetune.jsonl").string())).size() ==
        120);
}

TEST_CASE("usage errors exit 2 with a synopsis") {
  auto r = call({"run", "--paradigm", "frobnicate"});
  CHECK(r.code == 2);
  CHECK(r.err.find("Usage") != std::string::npos);
  r = call({"run", "--bogus-flag"});
  CHECK(r.code == 2);
  r = call({});
  CHECK(r.code == 2);
  r = call({"generate", "--samples", "100"});
  CHECK(r.code == 2);
  r = call({"report"});
  CHECK(r.code == 2);
  r = call({"run", "--agent", "oracle"});
  CHECK(r.code == 2);
}

TEST_CASE("domain errors exit 1") {
  const auto dir = testsupport::scratch_dir("cli_errors");
  auto r = call({"run", "--data", (dir / "nothing").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("error") != std::string::npos);
  gridsigma::text::write_file((dir / "broken.m").string(), "mpc.baseMVA = 100;\n");
  r = call({"export-case", "--case", (dir / "broken.m").string()});
  CHECK(r.code == 1);
}

TEST_CASE("export-case writes a parseable case") {
  const auto dir = testsupport::scratch_dir("cli_case");
  const auto path = (dir / "case14.m").string();
  const auto r = call({"export-case", "--out", path});
  CHECK(r.code == 0);
  CHECK(r.out.find(path) != std::string::npos);
  CHECK(gridsigma::grid::parse_case(gridsigma::text::read_file(path)) == gridsigma::grid::builtin_ieee14());
  CHECK(call({"export-case"}).out == gridsigma::text::read_file(path));
}

TEST_CASE("help exits 0") {
  const auto r = call({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("generate") != std::string::npos);
}

}  // TEST_SUITE
