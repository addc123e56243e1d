#include "datm/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "datm/artifact_io.hpp"
#include "datm/error.hpp"

namespace datm {

namespace {

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_boundary_punct(unsigned char c) { return c < 128 && std::ispunct(c) && c != '_'; }

struct PairHash {
  std::size_t operator()(const std::pair<std::string, std::string>& p) const noexcept {
    std::size_t h = std::hash<std::string>{}(p.first);
    return h ^ (std::hash<std::string>{}(p.second) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
  }
};

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(static_cast<unsigned char>(text[j]))) ++j;
    std::size_t b = i, e = j;
    while (b < e && is_boundary_punct(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && is_boundary_punct(static_cast<unsigned char>(text[e - 1]))) --e;
    if (e > b) {
      std::string tok(text.substr(b, e - b));
      for (char& c : tok) {
        if (static_cast<unsigned char>(c) < 128) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
      out.push_back(std::move(tok));
    }
    i = j;
  }
  return out;
}

double phrase_score(std::uint64_t pair_count, std::uint64_t count_a, std::uint64_t count_b,
                    std::uint64_t total_tokens, std::uint64_t min_pair_count) {
  if (count_a == 0 || count_b == 0) return 0.0;
  return (static_cast<double>(pair_count) - static_cast<double>(min_pair_count)) *
         static_cast<double>(total_tokens) /
         (static_cast<double>(count_a) * static_cast<double>(count_b));
}

std::vector<Document> merge_phrases(const std::vector<Document>& docs, double threshold,
                                    std::uint64_t min_pair_count) {
  if (!(threshold > 0.0)) throw ConfigError("phrase threshold must be positive");
  std::unordered_map<std::string, std::uint64_t> unigrams;
  std::unordered_map<std::pair<std::string, std::string>, std::uint64_t, PairHash> bigrams;
  std::uint64_t total = 0;
  for (const auto& doc : docs) {
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      ++unigrams[doc.tokens[i]];
      ++total;
      if (i + 1 < doc.tokens.size()) ++bigrams[{doc.tokens[i], doc.tokens[i + 1]}];
    }
  }

  std::vector<Document> out;
  out.reserve(docs.size());
  for (const auto& doc : docs) {
    Document merged{doc.id, {}};
    merged.tokens.reserve(doc.tokens.size());
    std::size_t i = 0;
    while (i < doc.tokens.size()) {
      if (i + 1 < doc.tokens.size()) {
        const auto& a = doc.tokens[i];
        const auto& b = doc.tokens[i + 1];
        const double score =
            phrase_score(bigrams[{a, b}], unigrams[a], unigrams[b], total, min_pair_count);
        if (score > threshold) {
          merged.tokens.push_back(a + "_" + b);
          i += 2;
          continue;
        }
      }
      merged.tokens.push_back(doc.tokens[i]);
      ++i;
    }
    out.push_back(std::move(merged));
  }
  return out;
}

std::vector<Document> filter_documents(std::vector<Document> docs, std::size_t min_terms) {
  std::erase_if(docs, [&](const Document& d) { return d.token_count() < min_terms; });
  return docs;
}

std::vector<std::pair<std::size_t, std::size_t>> window_bounds(std::size_t n, std::size_t length,
                                                               std::size_t stride) {
  if (length == 0 || stride == 0) throw ConfigError("window length and stride must be >= 1");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (n == 0) return out;
  if (n <= length) {
    out.emplace_back(0, n);
    return out;
  }
  std::size_t covered = 0;
  for (std::size_t start = 0; start + length <= n; start += stride) {
    out.emplace_back(start, start + length);
    covered = start + length;
  }
  const std::size_t remainder = n - covered;
  if (remainder == 0) return out;
  if (remainder >= (length + 1) / 2) {
    out.emplace_back(covered, n);
  } else {
    out.emplace_back(n - length, n);
  }
  return out;
}

std::vector<ContextWindow> windows(const Document& doc, std::size_t length, std::size_t stride) {
  std::vector<ContextWindow> out;
  for (const auto& [b, e] : window_bounds(doc.tokens.size(), length, stride)) {
    out.push_back({doc.id, b,
                   std::vector<std::string>(doc.tokens.begin() + static_cast<std::ptrdiff_t>(b),
                                            doc.tokens.begin() + static_cast<std::ptrdiff_t>(e))});
  }
  return out;
}

TermCounts count_terms(const std::vector<Document>& docs) {
  TermCounts counts;
  for (const auto& doc : docs) {
    for (const auto& t : doc.tokens) ++counts[t];
  }
  return counts;
}

std::vector<Document> read_raw_corpus(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  const bool jsonl = ext == ".jsonl" || ext == ".json";
  std::vector<Document> docs;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    if (!jsonl) {
      docs.push_back({std::to_string(lineno), tokenize(line)});
      continue;
    }
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(path.string() + ": malformed JSON (" + e.what() + ")", lineno);
    }
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("text") ||
        !obj["text"].is_string() || !(obj["id"].is_string() || obj["id"].is_number_integer())) {
      throw FormatError(path.string() + ": expected object with string 'id' and 'text'", lineno);
    }
    std::string id = obj["id"].is_string() ? obj["id"].get<std::string>()
                                           : std::to_string(obj["id"].get<long long>());
    docs.push_back({std::move(id), tokenize(obj["text"].get<std::string>())});
  }
  return docs;
}

std::vector<Document> parse_tokenized_corpus(std::string_view content) {
  std::vector<Document> docs;
  std::size_t lineno = 0;
  for (auto line : split(content, '\n')) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(std::string("malformed JSON in tokenized corpus (") + e.what() + ")",
                        lineno);
    }
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string() ||
        !obj.contains("tokens") || !obj["tokens"].is_array()) {
      throw FormatError("tokenized corpus line needs string 'id' and array 'tokens'", lineno);
    }
    Document doc{obj["id"].get<std::string>(), {}};
    for (const auto& t : obj["tokens"]) {
      if (!t.is_string()) throw FormatError("non-string token", lineno);
      doc.tokens.push_back(t.get<std::string>());
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::string serialize_tokenized_corpus(const std::vector<Document>& docs) {
  std::string out;
  for (const auto& doc : docs) {
    nlohmann::json obj{{"id", doc.id}, {"tokens", doc.tokens}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

}  // namespace datm
