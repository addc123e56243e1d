#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "datm/embedding_store.hpp"

namespace datm {

struct Document {
  std::string id;
  std::vector<std::string> tokens;

  std::size_t token_count() const noexcept { return tokens.size(); }
};

/// A contiguous run of terms from one document.
struct ContextWindow {
  std::string doc_id;
  std::size_t start = 0;
  std::vector<std::string> terms;
};

/// Lowercases ASCII, splits on whitespace and strips punctuation at token
/// boundaries. Underscores, inner hyphens and apostrophes survive.
std::vector<std::string> tokenize(std::string_view text);

/// Discounted collocation score (count(ab) - min_pair_count) * T / (count(a) * count(b)).
double phrase_score(std::uint64_t pair_count, std::uint64_t count_a, std::uint64_t count_b,
                    std::uint64_t total_tokens, std::uint64_t min_pair_count);

/// One left-to-right merge pass: adjacent pairs scoring above `threshold`
/// become "a_b". Pairs never span document boundaries. Apply twice for trigrams.
std::vector<Document> merge_phrases(const std::vector<Document>& docs, double threshold,
                                    std::uint64_t min_pair_count);

/// Keeps documents with at least `min_terms` tokens.
std::vector<Document> filter_documents(std::vector<Document> docs, std::size_t min_terms);

/// Rolling windows at offsets 0, stride, 2*stride, ... that fit entirely.
/// Leftover tokens are covered by one more window: the bare remainder when it
/// holds at least ceil(length/2) tokens, otherwise a full-length window
/// anchored at the end of the document. Documents shorter than `length`
/// yield a single window of all tokens.
std::vector<ContextWindow> windows(const Document& doc, std::size_t length, std::size_t stride);

/// [begin, end) token ranges of the windows above for a document of `n` tokens.
std::vector<std::pair<std::size_t, std::size_t>> window_bounds(std::size_t n, std::size_t length,
                                                               std::size_t stride);

TermCounts count_terms(const std::vector<Document>& docs);

/// Raw corpus: JSON Lines with string fields `id` and `text` (`.jsonl` /
/// `.json`), otherwise plain text with one document per line and the
/// 1-based line number as id. Returns tokenized documents.
std::vector<Document> read_raw_corpus(const std::filesystem::path& path);

/// Tokenized corpus: JSON Lines {"id": ..., "tokens": [...]}.
std::vector<Document> parse_tokenized_corpus(std::string_view content);
std::string serialize_tokenized_corpus(const std::vector<Document>& docs);

}  // namespace datm
