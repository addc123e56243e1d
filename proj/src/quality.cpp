#include "datm/quality.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "datm/artifact_io.hpp"
#include "datm/error.hpp"

namespace datm {

using Eigen::Index;

double QualityReport::reported_coherence() const { return std::clamp(coherence, 0.0, 1.0); }

double coherence(std::span<const Topic> topics, const EmbeddingStore& store, std::size_t top,
                 bool pooled) {
  if (top < 2) throw ConfigError("coherence needs top >= 2");
  if (topics.empty()) throw DataError("coherence of an empty topic list");
  double topic_sum = 0.0;
  double pooled_sum = 0.0;
  std::size_t pooled_pairs = 0;
  for (const auto& t : topics) {
    std::vector<std::size_t> ids;
    for (std::size_t r = 0; r < t.top_terms.size() && r < top; ++r) {
      if (auto id = store.find(t.top_terms[r].term)) ids.push_back(*id);
    }
    if (ids.size() < 2) {
      throw DataError("degenerate vocabulary: topic " + std::to_string(t.atom_id) +
                      " has fewer than 2 retrievable terms");
    }
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        const double ni = store.norm(ids[i]);
        const double nj = store.norm(ids[j]);
        const double c = (ni > 0.0 && nj > 0.0) ? store.vector(ids[i]).dot(store.vector(ids[j])) / (ni * nj) : 0.0;
        sum += c;
        ++pairs;
      }
    }
    topic_sum += sum / static_cast<double>(pairs);
    pooled_sum += sum;
    pooled_pairs += pairs;
  }
  return pooled ? pooled_sum / static_cast<double>(pooled_pairs)
                : topic_sum / static_cast<double>(topics.size());
}

double diversity(std::span<const Topic> topics, std::size_t top) {
  if (top < 1) throw ConfigError("diversity needs top >= 1");
  if (topics.empty()) throw DataError("diversity of an empty topic list");
  std::set<std::string> unique;
  for (const auto& t : topics) {
    if (t.top_terms.size() < top) {
      throw DataError("topic " + std::to_string(t.atom_id) + " lists fewer than " +
                      std::to_string(top) + " terms");
    }
    for (std::size_t r = 0; r < top; ++r) unique.insert(t.top_terms[r].term);
  }
  return static_cast<double>(unique.size()) / static_cast<double>(topics.size() * top);
}

double coverage(const EmbeddingStore& embedding, const AtomDictionary& dictionary,
                const SparseCode& code) {
  const auto& y = embedding.matrix();
  const Eigen::VectorXd mean = y.rowwise().mean();
  const double sst = (y.colwise() - mean).squaredNorm();
  if (sst == 0.0) throw DataError("degenerate embedding: all word vectors are identical");
  return 1.0 - reconstruction_sse(y, dictionary, code) / sst;
}

QualityReport evaluate(const EmbeddingStore& embedding, const AtomDictionary& dictionary,
                       const SparseCode& code, std::size_t top, bool pooled) {
  const auto topics = interpret_topics(dictionary, embedding, top);
  QualityReport r;
  r.k = dictionary.size();
  r.t0 = code.t0;
  r.coherence = coherence(topics, embedding, top, pooled);
  r.diversity = diversity(topics, std::min(top, embedding.size()));
  r.sse = reconstruction_sse(embedding.matrix(), dictionary, code);
  r.rmse = std::sqrt(r.sse / (static_cast<double>(embedding.dimension()) *
                              static_cast<double>(embedding.size())));
  r.coverage = coverage(embedding, dictionary, code);
  return r;
}

std::vector<SweepRow> sweep(const EmbeddingStore& embedding, std::span<const Index> k_grid,
                            std::span<const std::uint64_t> seeds, const FitOptions& base,
                            std::size_t top, bool pooled) {
  std::vector<SweepRow> rows;
  for (Index k : k_grid) {
    for (std::uint64_t seed : seeds) {
      SweepRow row;
      row.report.k = k;
      row.report.t0 = base.t0;
      row.report.seed = seed;
      try {
        FitOptions opt = base;
        opt.k = k;
        opt.seed = seed;
        FitResult fitted = fit(embedding, opt);
        row.report = evaluate(embedding, fitted.dictionary, fitted.code, top, pooled);
        row.report.seed = seed;
        row.fit = std::move(fitted.report);
      } catch (const Error& e) {
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

std::optional<std::size_t> knee(const std::vector<std::size_t>& idx, std::span<const SweepRow> rows,
                                double (*metric)(const QualityReport&)) {
  if (idx.size() < 3) return std::nullopt;
  const double x0 = static_cast<double>(rows[idx.front()].report.k);
  const double x1 = static_cast<double>(rows[idx.back()].report.k);
  const double y0 = metric(rows[idx.front()].report);
  const double y1 = metric(rows[idx.back()].report);
  if (x1 == x0 || y1 == y0) return std::nullopt;
  std::optional<std::size_t> best;
  double best_d = 0.0;
  for (std::size_t i = 1; i + 1 < idx.size(); ++i) {
    const double x = (static_cast<double>(rows[idx[i]].report.k) - x0) / (x1 - x0);
    const double y = (metric(rows[idx[i]].report) - y0) / (y1 - y0);
    const double d = y - x;
    if (d > best_d) {
      best_d = d;
      best = idx[i];
    }
  }
  return best;
}

}  // namespace

std::vector<std::size_t> elbow_candidates(std::span<const SweepRow> rows) {
  std::map<Index, std::size_t> first;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].error) first.emplace(rows[i].report.k, i);
  }
  std::vector<std::size_t> idx;
  for (const auto& [k, i] : first) idx.push_back(i);
  std::set<std::size_t> out;
  if (auto c = knee(idx, rows, [](const QualityReport& r) { return r.coverage; })) out.insert(*c);
  if (auto c = knee(idx, rows, [](const QualityReport& r) { return r.rmse; })) out.insert(*c);
  return {out.begin(), out.end()};
}

std::string serialize_sweep(std::span<const SweepRow> rows, std::span<const std::size_t> elbows) {
  std::string out = "k\tt0\tseed\tcoherence\tdiversity\tcoverage\tsse\trmse\telbow\terror\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i].report;
    const bool elbow = std::find(elbows.begin(), elbows.end(), i) != elbows.end();
    out += std::to_string(r.k) + "\t" + std::to_string(r.t0) + "\t" + std::to_string(r.seed) + "\t";
    if (rows[i].error) {
      out += "\t\t\t\t\t\t" + *rows[i].error + "\n";
      continue;
    }
    out += format_real(r.reported_coherence()) + "\t" + format_real(r.diversity) + "\t" +
           format_real(r.coverage) + "\t" + format_real(r.sse) + "\t" + format_real(r.rmse) + "\t" +
           (elbow ? "1" : "0") + "\t\n";
  }
  return out;
}

}  // namespace datm
