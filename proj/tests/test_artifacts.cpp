#include <fstream>

#include "doctest.h"
#include "oracles.hpp"

#include "datm/artifact_io.hpp"
#include "datm/error.hpp"
#include "datm/model_io.hpp"

using namespace datm;
using Eigen::MatrixXd;

TEST_CASE("sha256 of known strings") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("real number formatting round-trips") {
  datm::Rng rng = make_stream(51, "test");
  for (int i = 0; i < 1000; ++i) {
    const double v = standard_normal(rng) * std::pow(10.0, static_cast<double>(uniform_index(rng, 40)) - 20.0);
    CHECK(parse_real(format_real(v), 1) == v);
  }
  CHECK_THROWS_AS(parse_real("1.5x", 3), FormatError);
  CHECK_THROWS_AS(parse_integer("", 3), FormatError);
  CHECK(parse_integer("-42", 1) == -42);
}

TEST_CASE("text splitting") {
  CHECK(split("a\t\tb", '\t').size() == 3);
  CHECK(split_whitespace("  a \t b  ").size() == 2);
}

TEST_CASE("manifest guards downstream reads") {
  auto dir = oracle::scratch_dir("manifest");
  write_file_atomic(dir / "x.tsv", "payload\n");
  Manifest m;
  m.record("x.tsv", "payload\n", "fit");
  m.save(dir);
  CHECK(read_artifact(dir / "x.tsv", "fit") == "payload\n");
  CHECK(Manifest::load(dir).find("x.tsv")->producer == "fit");

  std::ofstream(dir / "x.tsv") << "tampered\n";
  CHECK_THROWS_AS(read_artifact(dir / "x.tsv", "fit"), DataError);

  try {
    read_artifact(dir / "missing.tsv", "infer");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("datm infer") != std::string::npos);
  }
}

TEST_CASE("model files round-trip") {
  datm::Rng rng = make_stream(52, "test");
  MatrixXd atoms = oracle::random_unit_columns(rng, 4, 3);
  AtomDictionary dict(atoms);
  Vocabulary vocab({"a", "b", "c"}, {1, 2, 3});
  SparseCode code{{{{2, 0.5}, {0, -1.25}}, {}, {{1, 3.0}}}, 2};

  auto back = parse_atoms(serialize_atoms(dict));
  CHECK(back.atoms() == atoms);
  auto codes = parse_codes(serialize_codes(code, vocab), vocab, 3, 2);
  REQUIRE(codes.columns.size() == 3);
  CHECK(codes.columns[0].size() == 2);
  CHECK(codes.columns[1].empty());
  CHECK(codes.columns[2][0] == CodeEntry{1, 3.0});

  CHECK_THROWS_AS(parse_codes("a\t7\t1.0\n", vocab, 3, 2), DataError);
  CHECK_THROWS_AS(parse_codes("a\t0\t1.0\na\t0\t2.0\n", vocab, 3, 2), DataError);
  CHECK_THROWS_AS(parse_codes("a\t0\t1\na\t1\t1\na\t2\t1\n", vocab, 3, 2), DataError);

  auto files = render_model(dict, code, vocab, nlohmann::json::object());
  auto dir = oracle::scratch_dir("model");
  Manifest m;
  for (const auto& [name, content] : files) {
    write_file_atomic(dir / name, content);
    m.record(name, content, "fit");
  }
  m.save(dir);
  EmbeddingStore store(vocab, MatrixXd::Random(4, 3));
  auto loaded = load_model(dir, store);
  CHECK(loaded.dictionary.atoms() == atoms);
  CHECK(loaded.header.at("K") == 3);

  EmbeddingStore other(Vocabulary({"a", "c", "b"}, {1, 2, 3}), MatrixXd::Random(4, 3));
  CHECK_THROWS_AS(load_model(dir, other), DataError);
}
