#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "datm/embedding_store.hpp"
#include "datm/sparse_dictionary.hpp"

namespace datm {

/// A fitted model on disk: model.json (header), atoms.tsv (K rows of N
/// values) and codes.tsv (word, atom_id, coefficient).
struct ModelFiles {
  static constexpr const char* kHeader = "model.json";
  static constexpr const char* kAtoms = "atoms.tsv";
  static constexpr const char* kCodes = "codes.tsv";
};

struct LoadedModel {
  AtomDictionary dictionary;
  SparseCode code;
  nlohmann::json header;
};

/// Checksum of the vocabulary order; ties a sparse code to its embedding.
std::string vocabulary_fingerprint(const Vocabulary& vocab);

std::string serialize_atoms(const AtomDictionary& dictionary);
AtomDictionary parse_atoms(std::string_view content);

std::string serialize_codes(const SparseCode& code, const Vocabulary& vocab);
SparseCode parse_codes(std::string_view content, const Vocabulary& vocab, Eigen::Index k, int t0);

/// Renders the three model files. `header` receives the structural fields
/// (N, K, t0, V, vocabulary fingerprint); callers add provenance and metrics.
std::map<std::string, std::string> render_model(const AtomDictionary& dictionary,
                                                const SparseCode& code, const Vocabulary& vocab,
                                                nlohmann::json header);

/// Reads a model directory written by `datm fit`, validating checksums and
/// the vocabulary fingerprint against `store`.
LoadedModel load_model(const std::filesystem::path& dir, const EmbeddingStore& store);

/// Reads only the header and atoms (no embedding required).
LoadedModel load_dictionary(const std::filesystem::path& dir);

}  // namespace datm
