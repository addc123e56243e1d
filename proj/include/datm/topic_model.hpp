#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "datm/corpus.hpp"
#include "datm/embedding_store.hpp"
#include "datm/gist.hpp"
#include "datm/sparse_dictionary.hpp"

namespace datm {

struct Topic {
  Eigen::Index atom_id = 0;
  Eigen::VectorXd vector;
  std::vector<Neighbor> top_terms;
  std::string label;
};

/// The `top` nearest words (by cosine) to every atom.
std::vector<Topic> interpret_topics(const AtomDictionary& dictionary, const EmbeddingStore& store,
                                    std::size_t top);

/// Attaches labels from an (atom_id -> label) map; unknown ids are ignored.
void apply_labels(std::vector<Topic>& topics, const std::map<Eigen::Index, std::string>& labels);

struct WindowTopic {
  Eigen::Index atom = 0;
  double cosine = 0.0;
};

/// Highest-cosine atom (lowest id on exact ties); none for a zero vector.
std::optional<WindowTopic> assign_vector(const Eigen::VectorXd& v, const AtomDictionary& dictionary);
/// As assign_vector, but degenerate gists also return none.
std::optional<WindowTopic> assign_window(const GistVector& gist, const AtomDictionary& dictionary);

struct SequenceItem {
  std::size_t offset = 0;
  Eigen::Index atom = 0;
  double cosine = 0.0;
};

struct TopicAssignment {
  std::string doc_id;
  std::vector<SequenceItem> sequence;
  /// Window share per topic; empty when no window was usable.
  std::vector<double> distribution;
  std::vector<char> presence;
  std::size_t counted_windows = 0;
  bool degenerate = false;
};

enum class CountMode {
  kEveryWindow,  // each rolling window counted once
  kDisjoint,     // count only non-overlapping windows (stride = length)
};

struct WindowConfig {
  std::size_t length = 10;
  std::size_t stride = 1;
  CountMode count_mode = CountMode::kEveryWindow;
};

/// Everything needed to code documents: immutable and shareable across threads.
struct CodingContext {
  const EmbeddingStore& store;
  SifWeights weights;
  const GlobalContext& global;
  const AtomDictionary& dictionary;
};

TopicAssignment code_document(const Document& doc, const CodingContext& context,
                              const WindowConfig& config);

/// Builds distribution and presence from per-topic window counts.
void finalize_counts(TopicAssignment& assignment, const std::vector<std::size_t>& counts);

/// Merges assignments of several documents belonging to one record: sequences
/// are concatenated, counts pooled, presence is the union.
TopicAssignment union_assignments(const std::string& record_id,
                                  std::span<const TopicAssignment> parts, Eigen::Index k);

struct PrevalenceTable {
  std::vector<std::string> groups;
  std::vector<std::size_t> group_sizes;
  /// groups x K fraction of each group's documents containing the topic.
  Eigen::MatrixXd fraction;

  /// Each topic column z-scored across groups (zero where the column is constant).
  Eigen::MatrixXd standardized() const;
};

/// Throws DataError for a document without a group.
PrevalenceTable prevalence_table(std::span<const TopicAssignment> assignments,
                                 const std::map<std::string, std::string>& group_of,
                                 Eigen::Index k);

std::string serialize_assignment(const TopicAssignment& assignment);
TopicAssignment parse_assignment(std::string_view line, Eigen::Index k, std::size_t lineno);
std::vector<TopicAssignment> parse_assignments(std::string_view content, Eigen::Index k);

/// atom_id, rank, term, cosine.
std::string serialize_topics(const std::vector<Topic>& topics);
/// atom_id<TAB>label lines.
std::map<Eigen::Index, std::string> read_labels(const std::filesystem::path& path);
/// doc_id<TAB>group lines.
std::map<std::string, std::string> read_groups(const std::filesystem::path& path);

}  // namespace datm
