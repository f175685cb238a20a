#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "tracereason/cli/cli.hpp"
#include "tracereason/report/report.hpp"

using namespace tracereason;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string kSpec = fixtures::path("ecas.tarski");
const std::string kModel = fixtures::path("ecas.trace");

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "tracereason-cli-test";
  fs::create_directories(dir);
  return dir / name;
}

std::string write_repaired() {
  auto m = fixtures::model("ecas.trace");
  auto fixed = model::apply_edit(m, model::RemoveTrace{{"requires", "r60", "r59"}});
  const auto p = scratch("repaired.trace").string();
  std::ofstream(p) << model::serialize_model(*fixed, model::ModelFormat::Native);
  return p;
}

}  // namespace

TEST_CASE("check exit codes") {
  auto r = run({"check", "--spec", kSpec, "--model", kModel});
  CHECK(r.code == cli::kViolations);
  CHECK(r.out.find("Properties#8.1 at a=r60, b=r59") != std::string::npos);
  CHECK(r.err.empty());

  auto ok = run({"check", "--spec", kSpec, "--model", write_repaired()});
  CHECK(ok.code == cli::kConsistent);
  CHECK(ok.out.find("0 violations") != std::string::npos);

  CHECK(run({"check", "--spec", "nope.tarski", "--model", kModel}).code == cli::kError);
  CHECK(run({"check", "--model", kModel}).code == cli::kError);
  CHECK(run({"check", "--spec", kSpec, "--model", kModel, "--format", "svg"}).code == cli::kError);
  CHECK(run({"frobnicate"}).code == cli::kError);
  CHECK(run({}).code == cli::kError);
  CHECK(run({"--help"}).code == cli::kConsistent);
}

TEST_CASE("ill-typed model is an error") {
  const auto p = scratch("bad.trace").string();
  std::ofstream(p) << fixtures::read(kModel) << "trace satisfies (r11 -> r60)\n";
  auto r = run({"check", "--spec", kSpec, "--model", p});
  CHECK(r.code == cli::kError);
  CHECK(r.err.find("DomainMismatch") != std::string::npos);
}

TEST_CASE("validate") {
  auto r = run({"validate", "--spec", kSpec});
  CHECK(r.code == cli::kConsistent);
  CHECK(r.out.find("9 sigs") != std::string::npos);
  CHECK(run({"validate", "--spec", kSpec, "--model", kModel}).code == cli::kConsistent);

  const auto p = scratch("broken.tarski").string();
  std::ofstream(p) << "sig A {";
  auto bad = run({"validate", "--spec", p});
  CHECK(bad.code == cli::kError);
  CHECK(bad.err.find("broken.tarski:1:") != std::string::npos);
}

TEST_CASE("export matches render_report byte for byte") {
  auto s = fixtures::spec("ecas.tarski");
  auto m = fixtures::model("ecas.trace");
  auto a = fixtures::analyze(m, s);
  for (auto [name, fmt] : {std::pair{"json", report::Format::Json}, std::pair{"dot", report::Format::Dot},
                           std::pair{"text", report::Format::Text}}) {
    auto r = run({"export", "--spec", kSpec, "--model", kModel, "--format", name, "--include-derivations"});
    CHECK(r.code == cli::kViolations);
    auto expected = report::render_report(a, m, report::RenderOptions{fmt, true, std::nullopt, false});
    CHECK(r.out == *expected);
  }
  const auto out = scratch("report.dot").string();
  auto r = run({"export", "--spec", kSpec, "--model", kModel, "--format", "dot", "--output", out});
  CHECK(r.out.empty());
  CHECK(fixtures::read(out) == *report::render_report(a, m, report::RenderOptions{report::Format::Dot, false, std::nullopt, false}));

  auto slice = run({"check", "--spec", kSpec, "--model", kModel, "--slice", "r60"});
  CHECK(slice.out.find("(slice at r60)") != std::string::npos);
  CHECK(run({"check", "--spec", kSpec, "--model", kModel, "--slice", "zz"}).code == cli::kError);
}

TEST_CASE("infer --accept-all") {
  const auto out = scratch("accepted.trace").string();
  auto r = run({"infer", "--spec", kSpec, "--model", kModel, "--accept-all", "--output", out});
  CHECK(r.code == cli::kViolations);
  CHECK(r.out.find("accepted 9 inferred traces") != std::string::npos);
  auto m = fixtures::model_from_text(fixtures::read(out));
  CHECK(m.tuples.size() == 16);
  CHECK(m.find_tuple({"satisfies", "i72", "r11"})->provenance == model::Provenance::Accepted);

  const auto json = scratch("accepted.json").string();
  run({"infer", "--spec", kSpec, "--model", kModel, "--accept-all", "--output", json});
  auto jm = model::parse_model_json(fixtures::read(json));
  REQUIRE(jm.ok());
  CHECK(model::structurally_equal(*jm, m));

  CHECK(run({"infer", "--spec", kSpec, "--model", kModel, "--accept-all"}).code == cli::kError);
  auto plain = run({"infer", "--spec", kSpec, "--model", kModel});
  CHECK(plain.out.find("inferred (9)") != std::string::npos);
}

TEST_CASE("explain") {
  auto r = run({"explain", "--spec", kSpec, "--model", kModel});
  CHECK(r.code == cli::kViolations);
  CHECK(r.out.find("violation 1: Properties#8.1 (excludes[requires,conflicts]) at a=r60, b=r59") != std::string::npos);
  CHECK(r.out.find("caused by 5 assigned traces") != std::string::npos);
  CHECK(r.out.find("conflicts(r60, r59)  by Conflicts#1.2") != std::string::npos);

  auto ok = run({"explain", "--spec", kSpec, "--model", write_repaired()});
  CHECK(ok.code == cli::kConsistent);
  CHECK(ok.out == "model ecas is consistent\n");
}

TEST_CASE("suggest") {
  auto t = run({"suggest", "types", "--spec", kSpec, "--model", kModel, "--location", "i14"});
  CHECK(t.code == cli::kConsistent);
  CHECK(t.out == "conflicts\ncontains\nequals\nrefines\nrequires\nsatisfies\n");
  auto g = run({"suggest", "targets", "--spec", kSpec, "--model", kModel, "--location", "i14", "--relation", "satisfies"});
  CHECK(g.out == "r11\nr59\nr60\nr97\nr98\n");
  auto bad = run({"suggest", "targets", "--spec", kSpec, "--model", kModel, "--location", "r11", "--relation", "satisfies"});
  CHECK(bad.code == cli::kError);
  CHECK(bad.err.find("DomainMismatch") != std::string::npos);
  CHECK(run({"suggest", "--spec", kSpec}).code == cli::kError);
}

TEST_CASE("accept") {
  const auto out = scratch("one.trace").string();
  auto r = run({"accept", "--spec", kSpec, "--model", kModel, "--trace", "satisfies(i14, r11)", "--output", out});
  CHECK(r.code == cli::kViolations);
  auto m = fixtures::model_from_text(fixtures::read(out));
  CHECK(m.tuples.size() == 8);
  CHECK(m.find_tuple({"satisfies", "i14", "r11"})->provenance == model::Provenance::Accepted);

  auto not_inferred =
      run({"accept", "--spec", kSpec, "--model", kModel, "--trace", "refines(r60, r11)", "--output", out});
  CHECK(not_inferred.code == cli::kError);
  CHECK(run({"accept", "--spec", kSpec, "--model", kModel, "--trace", "garbage", "--output", out}).code == cli::kError);

  // Default target is the model file itself.
  const auto copy = scratch("inplace.trace").string();
  fs::copy_file(kModel, copy, fs::copy_options::overwrite_existing);
  CHECK(run({"accept", "--spec", kSpec, "--model", copy, "--all"}).code == cli::kViolations);
  CHECK(fixtures::model_from_text(fixtures::read(copy)).tuples.size() == 16);
}

TEST_CASE("repeated runs give identical output") {
  for (const auto& fmt : {"text", "json", "dot"}) {
    const std::vector<std::string> args{"check", "--spec", kSpec, "--model", kModel, "--format", fmt, "--include-derivations"};
    const auto first = run(args);
    for (int i = 0; i < 3; ++i) CHECK(run(args).out == first.out);
  }
}
