#include <fstream>
#include <iostream>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "datm/artifact_io.hpp"
#include "datm/model_io.hpp"
#include "datm/topic_model.hpp"

using namespace datm;
namespace fs = std::filesystem;
using cli::run;

namespace {

// Runs the CLI with stderr captured.
struct Captured {
  int code;
  std::string err;
};

Captured run_capture(const std::vector<std::string>& args) {
  std::ostringstream err;
  auto* old = std::cerr.rdbuf(err.rdbuf());
  const int code = run(args);
  std::cerr.rdbuf(old);
  return {code, err.str()};
}

std::string slurp(const fs::path& p) { return read_file(p); }

void synth_small(const fs::path& dir, int seed = 3) {
  REQUIRE(run({"synth", "--out", dir.string(), "--k-true", "6", "--dims", "10", "--vocab", "200",
               "--t0-true", "2", "--docs", "30", "--doc-length", "30", "--seed", std::to_string(seed)}) == 0);
}

std::vector<std::string> store_args(const fs::path& d) {
  return {"--embedding", (d / "embedding.txt").string(), "--counts", (d / "counts.tsv").string(),
          "--min-count", "1"};
}

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("preprocess on a three-document fixture") {
  auto dir = oracle::scratch_dir("cli_pre");
  std::ofstream(dir / "raw.jsonl") << R"({"id": "d1", "text": "The gun was found."})" "\n"
                                   << R"({"id": "d2", "text": "Gun"})" "\n"
                                   << R"({"id": "d3", "text": "found a note"})" "\n";
  REQUIRE(run({"preprocess", "--corpus", (dir / "raw.jsonl").string(), "--out", (dir / "out").string(),
               "--min-terms", "2"}) == 0);
  auto docs = parse_tokenized_corpus(slurp(dir / "out/corpus.jsonl"));
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].id == "d1");
  CHECK(docs[1].id == "d3");
  CHECK(slurp(dir / "out/counts.tsv") == "found\t2\ngun\t2\na\t1\nnote\t1\nthe\t1\nwas\t1\n");
  auto stats = nlohmann::json::parse(slurp(dir / "out/preprocess.json"));
  CHECK(stats.at("documents_dropped") == 1);
  CHECK(Manifest::load(dir / "out").find("corpus.jsonl")->producer == "preprocess");

  REQUIRE(run({"preprocess", "--corpus", (dir / "raw.jsonl").string(), "--out", (dir / "all").string(),
               "--min-terms", "0"}) == 0);
  CHECK(parse_tokenized_corpus(slurp(dir / "all/corpus.jsonl")).size() == 3);
}

TEST_CASE("preprocess on an empty corpus succeeds with a warning") {
  auto dir = oracle::scratch_dir("cli_empty");
  std::ofstream(dir / "raw.txt") << "";
  auto r = run_capture({"preprocess", "--corpus", (dir / "raw.txt").string(), "--out", (dir / "out").string()});
  CHECK(r.code == 0);
  CHECK(r.err.find("warning") != std::string::npos);
  CHECK(slurp(dir / "out/corpus.jsonl").empty());
  CHECK(slurp(dir / "out/counts.tsv").empty());
}

TEST_CASE("exit codes") {
  auto dir = oracle::scratch_dir("cli_exit");
  synth_small(dir / "s");
  CHECK(run_capture({"fit", "--bogus"}).code == cli::kConfigError);
  CHECK(run_capture({"fit", "--k", "3"}).code == cli::kConfigError);
  CHECK(run_capture(cat({"fit", "--k", "3", "--t0", "4", "--out", (dir / "m").string()}, store_args(dir / "s"))).code ==
        cli::kConfigError);
  CHECK(run_capture(cat({"fit", "--k", "5000", "--t0", "1", "--out", (dir / "m").string()}, store_args(dir / "s"))).code ==
        cli::kConfigError);
  CHECK(run_capture({"fit", "--k", "3", "--t0", "1", "--embedding", (dir / "nope.txt").string(), "--counts",
                     (dir / "s/counts.tsv").string()}).code == cli::kDataError);
  CHECK(run_capture({"synth", "--k-true", "1", "--out", (dir / "x").string()}).code == cli::kConfigError);

  // Vectors large enough that squared errors overflow.
  std::ofstream(dir / "huge.txt") << "3 2\na 1e200 1e200\nb -1e200 1e200\nc 1e200 -1e200\n";
  std::ofstream(dir / "huge.tsv") << "a\t1\nb\t1\nc\t1\n";
  CHECK(run_capture({"fit", "--k", "2", "--t0", "1", "--min-count", "1", "--embedding", (dir / "huge.txt").string(),
                     "--counts", (dir / "huge.tsv").string(), "--out", (dir / "h").string()}).code ==
        cli::kNumericError);
}

TEST_CASE("configuration file supplies flags") {
  auto dir = oracle::scratch_dir("cli_config");
  synth_small(dir / "s");
  std::ofstream(dir / "run.ini") << "# flat key=value\nk=4\nt0=2\nmax_iter=3\nseed=7\nmin-count=1\n";
  REQUIRE(run(cat({"fit", "--config", (dir / "run.ini").string(), "--out", (dir / "m").string()}, store_args(dir / "s"))) == 0);
  auto header = nlohmann::json::parse(slurp(dir / "m/model.json"));
  CHECK(header.at("K") == 4);
  CHECK(header.at("t0") == 2);
  CHECK(header.at("seed") == 7);
  CHECK(header.at("config").at("max_iter") == 3);
}

TEST_CASE("downstream commands check upstream artifacts") {
  auto dir = oracle::scratch_dir("cli_chain");
  synth_small(dir / "s");
  REQUIRE(run(cat({"fit", "--k", "6", "--t0", "2", "--out", (dir / "m").string()}, store_args(dir / "s"))) == 0);
  REQUIRE(run(cat({"topics", "--model", (dir / "m").string(), "--out", (dir / "t").string(), "--top", "5"},
                  store_args(dir / "s"))) == 0);
  auto topics = slurp(dir / "t/topics.tsv");
  CHECK(std::count(topics.begin(), topics.end(), '\n') == 1 + 6 * 5);
  CHECK(nlohmann::json::parse(slurp(dir / "t/topics.json")).contains("config_sha256"));

  auto missing = run_capture(cat({"infer", "--model", (dir / "absent").string(), "--corpus",
                                  (dir / "s/corpus.jsonl").string(), "--out", (dir / "i").string()},
                                 store_args(dir / "s")));
  CHECK(missing.code == cli::kDataError);
  CHECK(missing.err.find("datm fit") != std::string::npos);

  std::ofstream(dir / "m/atoms.tsv", std::ios::app) << "\n";
  auto tampered = run_capture(cat({"topics", "--model", (dir / "m").string(), "--out", (dir / "t2").string()},
                                  store_args(dir / "s")));
  CHECK(tampered.code == cli::kDataError);
  CHECK(tampered.err.find("checksum") != std::string::npos);
}

TEST_CASE("fit and infer are byte-identical across reruns") {
  auto dir = oracle::scratch_dir("cli_determinism");
  synth_small(dir / "s");
  for (const char* run_dir : {"a", "b"}) {
    const auto out = dir / run_dir;
    REQUIRE(run(cat({"fit", "--k", "6", "--t0", "2", "--seed", "5", "--out", (out / "m").string()},
                    store_args(dir / "s"))) == 0);
    REQUIRE(run(cat({"infer", "--model", (out / "m").string(), "--corpus", (dir / "s/corpus.jsonl").string(),
                     "--out", (out / "i").string(), "--seed", "5", "--sample-cap", "200", "--threads", "2"},
                    store_args(dir / "s"))) == 0);
  }
  for (const char* f : {"m/model.json", "m/atoms.tsv", "m/codes.tsv", "m/MANIFEST", "i/assignments.jsonl",
                        "i/global_context.tsv", "i/global_context.json", "i/MANIFEST"}) {
    CHECK_MESSAGE(slurp(dir / "a" / f) == slurp(dir / "b" / f), f);
  }
}

TEST_CASE("sweep rows match individual fits") {
  auto dir = oracle::scratch_dir("cli_sweep");
  REQUIRE(run({"synth", "--out", (dir / "s").string(), "--k-true", "20", "--dims", "30", "--vocab", "400",
               "--t0-true", "3", "--seed", "2"}) == 0);
  REQUIRE(run(cat({"sweep", "--k-grid", "5,20,80", "--t0", "3", "--seed", "1", "--out", (dir / "sw").string()},
                  store_args(dir / "s"))) == 0);
  const std::string tsv = slurp(dir / "sw/sweep.tsv");
  auto lines = split(tsv, '\n');
  REQUIRE(lines.size() == 5);  // header, 3 rows, trailing empty
  for (int i = 0; i < 3; ++i) {
    const std::string k = std::vector<std::string>{"5", "20", "80"}[static_cast<std::size_t>(i)];
    const auto out = dir / ("k" + k);
    REQUIRE(run(cat({"fit", "--k", k, "--t0", "3", "--seed", "1", "--out", out.string()}, store_args(dir / "s"))) == 0);
    auto metrics = nlohmann::json::parse(slurp(out / "model.json")).at("metrics");
    auto fields = split(lines[static_cast<std::size_t>(i) + 1], '\t');
    CHECK(fields[0] == k);
    CHECK(fields[3] == format_real(metrics.at("coherence_reported").get<double>()));
    CHECK(fields[4] == format_real(metrics.at("diversity").get<double>()));
    CHECK(fields[5] == format_real(metrics.at("coverage").get<double>()));
    CHECK(fields[6] == format_real(metrics.at("sse").get<double>()));
    CHECK(fields[7] == format_real(metrics.at("rmse").get<double>()));
    const double diversity = parse_real(fields[4], 1);
    CHECK(diversity >= 1.0 / std::stod(k));
    CHECK(diversity <= 1.0);
  }
}

TEST_CASE("analyze reproduces a monotone loading-prevalence relation") {
  auto dir = oracle::scratch_dir("cli_analyze");
  // Words: pos and neg poles along e0, filler along e1 and e2.
  Eigen::MatrixXd words(3, 4);
  words << 1, -1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1;
  write_embedding(dir / "embedding.txt", {"pos", "neg", "f1", "f2"}, words);
  std::ofstream(dir / "counts.tsv") << "pos\t5\nneg\t5\nf1\t5\nf2\t5\n";
  std::ofstream(dir / "dimension.json") << R"({"name": "d", "positive": ["pos"], "negative": ["neg"]})";

  // Five atoms whose loading on e0 rises with the id.
  const int k = 5;
  Eigen::MatrixXd atoms(3, k);
  for (int j = 0; j < k; ++j) {
    const double angle = 0.3 + 0.5 * j;
    atoms.col(j) << std::cos(angle) * -1.0, std::sin(angle), 0.0;
  }
  AtomDictionary dict(atoms);
  Vocabulary vocab({"pos", "neg", "f1", "f2"}, {5, 5, 5, 5});
  SparseCode code{std::vector<SparseColumn>(4), 1};
  Manifest m;
  fs::create_directories(dir / "model");
  for (const auto& [name, content] : render_model(dict, code, vocab, nlohmann::json::object())) {
    write_file_atomic(dir / "model" / name, content);
    m.record(name, content, "fit");
  }
  m.save(dir / "model");

  // Topic j is present in (j+1) of 10 group A docs and in 5 of 10 group B docs.
  std::string lines, groups;
  for (int d = 0; d < 20; ++d) {
    const bool a = d < 10;
    std::vector<std::size_t> counts(k, 0);
    for (int j = 0; j < k; ++j) counts[j] = a ? (d < j + 1) : (d - 10 < 5);
    TopicAssignment t;
    t.doc_id = "doc" + std::to_string(d);
    finalize_counts(t, counts);
    lines += serialize_assignment(t) + "\n";
    groups += t.doc_id + "\t" + (a ? "A" : "B") + "\n";
  }
  std::ofstream(dir / "assignments.jsonl") << lines;
  std::ofstream(dir / "groups.tsv") << groups;

  REQUIRE(run({"analyze", "--model", (dir / "model").string(), "--assignments", (dir / "assignments.jsonl").string(),
               "--groups", (dir / "groups.tsv").string(), "--dimension", (dir / "dimension.json").string(),
               "--embedding", (dir / "embedding.txt").string(), "--counts", (dir / "counts.tsv").string(),
               "--min-count", "1", "--group-a", "A", "--out", (dir / "out").string()}) == 0);
  auto summary = nlohmann::json::parse(slurp(dir / "out/analysis_summary.json"));
  CHECK(summary.at("rho").get<double>() == 1.0);
  CHECK(summary.at("n") == k);
  CHECK(std::filesystem::exists(dir / "out/analyze.json"));
  CHECK(slurp(dir / "out/prevalence.tsv").rfind("group\tdocuments\t0\t1\t2\t3\t4\nA\t10\t0.10000000000000001", 0) == 0);
}
