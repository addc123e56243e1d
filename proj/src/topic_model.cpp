#include "datm/topic_model.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "datm/artifact_io.hpp"
#include "datm/error.hpp"

namespace datm {

using Eigen::Index;
using Eigen::VectorXd;

std::vector<Topic> interpret_topics(const AtomDictionary& dictionary, const EmbeddingStore& store,
                                    std::size_t top) {
  if (top < 1) throw ConfigError("top must be at least 1");
  std::vector<Topic> topics;
  topics.reserve(static_cast<std::size_t>(dictionary.size()));
  for (Index k = 0; k < dictionary.size(); ++k) {
    VectorXd atom = dictionary.atom(k);
    topics.push_back({k, atom, nearest_words(store, atom, top), {}});
  }
  return topics;
}

void apply_labels(std::vector<Topic>& topics, const std::map<Index, std::string>& labels) {
  for (auto& t : topics) {
    if (auto it = labels.find(t.atom_id); it != labels.end()) t.label = it->second;
  }
}

std::optional<WindowTopic> assign_vector(const VectorXd& v, const AtomDictionary& dictionary) {
  const double n = v.norm();
  if (n == 0.0 || !std::isfinite(n)) return std::nullopt;
  const VectorXd dots = dictionary.atoms().transpose() * v;
  Index best = 0;
  for (Index k = 1; k < dots.size(); ++k) {
    if (dots[k] > dots[best]) best = k;
  }
  return WindowTopic{best, dots[best] / n};
}

std::optional<WindowTopic> assign_window(const GistVector& gist, const AtomDictionary& dictionary) {
  if (gist.degenerate) return std::nullopt;
  return assign_vector(gist.vector, dictionary);
}

void finalize_counts(TopicAssignment& a, const std::vector<std::size_t>& counts) {
  std::size_t total = 0;
  for (auto c : counts) total += c;
  a.counted_windows = total;
  a.presence.assign(counts.size(), 0);
  a.distribution.clear();
  a.degenerate = total == 0;
  if (total == 0) return;
  a.distribution.resize(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    a.distribution[k] = static_cast<double>(counts[k]) / static_cast<double>(total);
    a.presence[k] = counts[k] > 0;
  }
}

TopicAssignment code_document(const Document& doc, const CodingContext& ctx,
                              const WindowConfig& config) {
  const auto k = static_cast<std::size_t>(ctx.dictionary.size());
  TopicAssignment out;
  out.doc_id = doc.id;
  std::vector<std::size_t> counts(k, 0);
  for (const auto& w : windows(doc, config.length, config.stride)) {
    if (auto hit = assign_window(local_gist(w, ctx.store, ctx.weights, ctx.global), ctx.dictionary)) {
      out.sequence.push_back({w.start, hit->atom, hit->cosine});
      if (config.count_mode == CountMode::kEveryWindow) ++counts[static_cast<std::size_t>(hit->atom)];
    }
  }
  if (config.count_mode == CountMode::kDisjoint) {
    for (const auto& w : windows(doc, config.length, config.length)) {
      if (auto hit = assign_window(local_gist(w, ctx.store, ctx.weights, ctx.global), ctx.dictionary)) {
        ++counts[static_cast<std::size_t>(hit->atom)];
      }
    }
  }
  finalize_counts(out, counts);
  return out;
}

TopicAssignment union_assignments(const std::string& record_id,
                                  std::span<const TopicAssignment> parts, Index k) {
  TopicAssignment out;
  out.doc_id = record_id;
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  for (const auto& p : parts) {
    out.sequence.insert(out.sequence.end(), p.sequence.begin(), p.sequence.end());
    for (std::size_t j = 0; j < p.distribution.size() && j < counts.size(); ++j) {
      counts[j] += static_cast<std::size_t>(std::llround(p.distribution[j] * static_cast<double>(p.counted_windows)));
    }
  }
  finalize_counts(out, counts);
  return out;
}

Eigen::MatrixXd PrevalenceTable::standardized() const {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(fraction.rows(), fraction.cols());
  if (fraction.rows() == 0) return z;
  for (Index k = 0; k < fraction.cols(); ++k) {
    const double mean = fraction.col(k).mean();
    const double var = (fraction.col(k).array() - mean).square().mean();
    if (var <= 0.0) continue;
    z.col(k) = (fraction.col(k).array() - mean) / std::sqrt(var);
  }
  return z;
}

PrevalenceTable prevalence_table(std::span<const TopicAssignment> assignments,
                                 const std::map<std::string, std::string>& group_of, Index k) {
  std::map<std::string, std::size_t> index;
  for (const auto& [doc, g] : group_of) index.emplace(g, 0);
  PrevalenceTable t;
  for (auto& [g, i] : index) {
    i = t.groups.size();
    t.groups.push_back(g);
  }
  t.group_sizes.assign(t.groups.size(), 0);
  Eigen::MatrixXd present = Eigen::MatrixXd::Zero(static_cast<Index>(t.groups.size()), k);
  for (const auto& a : assignments) {
    auto it = group_of.find(a.doc_id);
    if (it == group_of.end()) throw DataError("no group for document '" + a.doc_id + "'");
    const std::size_t g = index.at(it->second);
    ++t.group_sizes[g];
    for (Index j = 0; j < k && j < static_cast<Index>(a.presence.size()); ++j) {
      if (a.presence[static_cast<std::size_t>(j)]) present(static_cast<Index>(g), j) += 1.0;
    }
  }
  t.fraction = present;
  for (std::size_t g = 0; g < t.groups.size(); ++g) {
    if (t.group_sizes[g] > 0) t.fraction.row(static_cast<Index>(g)) /= static_cast<double>(t.group_sizes[g]);
  }
  return t;
}

std::string serialize_assignment(const TopicAssignment& a) {
  nlohmann::json seq = nlohmann::json::array();
  for (const auto& s : a.sequence) seq.push_back({s.offset, s.atom, s.cosine});
  nlohmann::json dist = nlohmann::json::object();
  nlohmann::json presence = nlohmann::json::array();
  for (std::size_t k = 0; k < a.distribution.size(); ++k) {
    if (a.distribution[k] > 0.0) dist[std::to_string(k)] = a.distribution[k];
  }
  for (std::size_t k = 0; k < a.presence.size(); ++k) {
    if (a.presence[k]) presence.push_back(k);
  }
  nlohmann::json obj{{"id", a.doc_id},
                     {"sequence", seq},
                     {"distribution", dist},
                     {"presence", presence},
                     {"windows", a.counted_windows}};
  if (a.degenerate) obj["degenerate"] = true;
  return obj.dump();
}

TopicAssignment parse_assignment(std::string_view line, Index k, std::size_t lineno) {
  TopicAssignment a;
  try {
    auto obj = nlohmann::json::parse(line);
    a.doc_id = obj.at("id").get<std::string>();
    for (const auto& s : obj.at("sequence")) {
      a.sequence.push_back({s.at(0).get<std::size_t>(), s.at(1).get<Index>(), s.at(2).get<double>()});
    }
    a.counted_windows = obj.value("windows", std::size_t{0});
    a.presence.assign(static_cast<std::size_t>(k), 0);
    const auto& dist = obj.at("distribution");
    if (!dist.empty()) {
      a.distribution.assign(static_cast<std::size_t>(k), 0.0);
      for (const auto& [key, val] : dist.items()) {
        const long long j = parse_integer(key, lineno);
        if (j < 0 || j >= k) throw DataError("assignment references atom outside the model");
        a.distribution[static_cast<std::size_t>(j)] = val.get<double>();
      }
    }
    for (const auto& p : obj.at("presence")) {
      const auto j = p.get<long long>();
      if (j < 0 || j >= k) throw DataError("assignment references atom outside the model");
      a.presence[static_cast<std::size_t>(j)] = 1;
    }
    a.degenerate = obj.value("degenerate", false);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("assignments: ") + e.what(), lineno);
  }
  return a;
}

std::vector<TopicAssignment> parse_assignments(std::string_view content, Index k) {
  std::vector<TopicAssignment> out;
  std::size_t lineno = 0;
  for (auto line : split(content, '\n')) {
    ++lineno;
    if (line.empty()) continue;
    out.push_back(parse_assignment(line, k, lineno));
  }
  return out;
}

std::string serialize_topics(const std::vector<Topic>& topics) {
  std::string out = "atom_id\trank\tterm\tcosine\n";
  for (const auto& t : topics) {
    for (std::size_t r = 0; r < t.top_terms.size(); ++r) {
      out += std::to_string(t.atom_id) + "\t" + std::to_string(r + 1) + "\t" + t.top_terms[r].term +
             "\t" + format_real(t.top_terms[r].cosine) + "\n";
    }
  }
  return out;
}

std::map<Index, std::string> read_labels(const std::filesystem::path& path) {
  std::map<Index, std::string> labels;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split(line, '\t');
    if (f.size() != 2) throw FormatError(path.string() + ": expected 'atom_id<TAB>label'", lineno);
    labels[static_cast<Index>(parse_integer(f[0], lineno))] = std::string(f[1]);
  }
  return labels;
}

std::map<std::string, std::string> read_groups(const std::filesystem::path& path) {
  std::map<std::string, std::string> groups;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split(line, '\t');
    if (f.size() != 2) throw FormatError(path.string() + ": expected 'doc_id<TAB>group'", lineno);
    if (!groups.emplace(std::string(f[0]), std::string(f[1])).second) {
      throw DataError(path.string() + ": duplicate document '" + std::string(f[0]) + "'");
    }
  }
  return groups;
}

}  // namespace datm
