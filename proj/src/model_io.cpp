#include "datm/model_io.hpp"

#include "datm/artifact_io.hpp"
#include "datm/error.hpp"

namespace datm {

namespace fs = std::filesystem;
using Eigen::Index;

std::string vocabulary_fingerprint(const Vocabulary& vocab) {
  std::string joined;
  for (const auto& w : vocab.words()) {
    joined += w;
    joined += '\n';
  }
  return sha256_hex(joined);
}

std::string serialize_atoms(const AtomDictionary& dictionary) {
  std::string out;
  const auto& d = dictionary.atoms();
  for (Index k = 0; k < d.cols(); ++k) {
    for (Index r = 0; r < d.rows(); ++r) {
      if (r) out += '\t';
      out += format_real(d(r, k));
    }
    out += '\n';
  }
  return out;
}

AtomDictionary parse_atoms(std::string_view content) {
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 0;
  for (auto line : split(content, '\n')) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    for (auto f : split(line, '\t')) row.push_back(parse_real(f, lineno));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError("atoms.tsv: ragged row", lineno);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("atoms.tsv: no atoms");
  Eigen::MatrixXd atoms(static_cast<Index>(rows.front().size()), static_cast<Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t r = 0; r < rows[k].size(); ++r) {
      atoms(static_cast<Index>(r), static_cast<Index>(k)) = rows[k][r];
    }
  }
  return AtomDictionary(std::move(atoms));
}

std::string serialize_codes(const SparseCode& code, const Vocabulary& vocab) {
  std::string out;
  for (std::size_t c = 0; c < code.columns.size(); ++c) {
    for (const auto& e : code.columns[c]) {
      out += vocab.word(c) + "\t" + std::to_string(e.atom) + "\t" + format_real(e.coefficient) + "\n";
    }
  }
  return out;
}

SparseCode parse_codes(std::string_view content, const Vocabulary& vocab, Index k, int t0) {
  SparseCode code{std::vector<SparseColumn>(vocab.size()), t0};
  std::size_t lineno = 0;
  for (auto line : split(content, '\n')) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split(line, '\t');
    if (f.size() != 3) throw FormatError("codes.tsv: expected word, atom_id, coefficient", lineno);
    auto id = vocab.find(f[0]);
    if (!id) throw DataError("codes.tsv: word '" + std::string(f[0]) + "' not in embedding");
    const long long atom = parse_integer(f[1], lineno);
    if (atom < 0 || atom >= k) throw DataError("corrupt model: atom id out of range in codes.tsv");
    auto& col = code.columns[*id];
    for (const auto& e : col) {
      if (e.atom == atom) throw DataError("corrupt model: repeated atom in one column");
    }
    col.push_back({static_cast<Index>(atom), parse_real(f[2], lineno)});
    if (static_cast<int>(col.size()) > t0) throw DataError("corrupt model: column exceeds t0");
  }
  return code;
}

std::map<std::string, std::string> render_model(const AtomDictionary& dictionary,
                                                const SparseCode& code, const Vocabulary& vocab,
                                                nlohmann::json header) {
  header["N"] = dictionary.dimension();
  header["K"] = dictionary.size();
  header["t0"] = code.t0;
  header["V"] = vocab.size();
  header["vocabulary_sha256"] = vocabulary_fingerprint(vocab);
  return {{ModelFiles::kHeader, header.dump(2) + "\n"},
          {ModelFiles::kAtoms, serialize_atoms(dictionary)},
          {ModelFiles::kCodes, serialize_codes(code, vocab)}};
}

LoadedModel load_dictionary(const fs::path& dir) {
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(read_artifact(dir / ModelFiles::kHeader, "fit"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model.json: ") + e.what());
  }
  AtomDictionary dictionary = parse_atoms(read_artifact(dir / ModelFiles::kAtoms, "fit"));
  if (header.value("K", Index{-1}) != dictionary.size() ||
      header.value("N", Index{-1}) != dictionary.dimension()) {
    throw DataError("model.json does not match atoms.tsv");
  }
  return LoadedModel{std::move(dictionary), SparseCode{{}, header.value("t0", 1)}, std::move(header)};
}

LoadedModel load_model(const fs::path& dir, const EmbeddingStore& store) {
  LoadedModel model = load_dictionary(dir);
  if (model.header.value("vocabulary_sha256", std::string()) != vocabulary_fingerprint(store.vocab())) {
    throw DataError("model was fitted on a different vocabulary (check --min-count and inputs)");
  }
  if (model.dictionary.dimension() != store.dimension()) {
    throw DataError("model dimension differs from embedding dimension");
  }
  model.code = parse_codes(read_artifact(dir / ModelFiles::kCodes, "fit"), store.vocab(),
                           model.dictionary.size(), model.code.t0);
  return model;
}

}  // namespace datm
