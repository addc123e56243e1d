#include "cli.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "datm/artifact_io.hpp"
#include "datm/corpus.hpp"
#include "datm/embedding_store.hpp"
#include "datm/error.hpp"
#include "datm/gist.hpp"
#include "datm/model_io.hpp"
#include "datm/quality.hpp"
#include "datm/random.hpp"
#include "datm/semantic_dimensions.hpp"
#include "datm/sparse_dictionary.hpp"
#include "datm/synth.hpp"
#include "datm/topic_model.hpp"

namespace datm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

json config_json(const RunConfig& c) {
  return json{{"k", c.k},
              {"t0", c.t0},
              {"max_iter", c.max_iter},
              {"a", c.a},
              {"window", c.window},
              {"stride", c.stride},
              {"min_count", c.min_count},
              {"min_terms", c.min_terms},
              {"top", c.top},
              {"seed", c.seed},
              {"sse_tol", c.sse_tol},
              {"sample_cap", c.sample_cap},
              {"phrase_threshold", c.phrase_threshold},
              {"phrase_min_count", c.phrase_min_count},
              {"phrase_passes", c.phrase_passes},
              {"k_grid", c.k_grid},
              {"seeds", c.seeds},
              {"nonnegative", c.nonnegative},
              {"pooled_coherence", c.pooled_coherence},
              {"centered_c0", c.centered_c0},
              {"window_unit", c.window_unit},
              {"count_mode", c.count_mode},
              {"standardize", c.standardize},
              {"group_a", c.group_a},
              {"synth",
               {{"k_true", c.k_true},
                {"dims", c.dims},
                {"vocab", c.vocab},
                {"t0_true", c.t0_true},
                {"noise", c.noise},
                {"docs", c.docs},
                {"doc_length", c.doc_length},
                {"emission_scale", c.emission_scale},
                {"unigram_mix", c.unigram_mix},
                {"global_weight", c.global_weight},
                {"dimension_strength", c.dimension_strength},
                {"group_bias", c.group_bias},
                {"positive_coefficients", c.positive_coefficients}}}};
}

// Collects the outputs of one command, then writes them atomically and
// records their checksums in the output directory's MANIFEST.
class Outputs {
 public:
  Outputs(fs::path dir, std::string producer) : dir_(std::move(dir)), producer_(std::move(producer)) {}

  void add(const std::string& name, std::string content) { files_[name] = std::move(content); }

  void commit() const {
    fs::create_directories(dir_);
    Manifest manifest = Manifest::load(dir_);
    for (const auto& [name, content] : files_) {
      write_file_atomic(dir_ / name, content);
      manifest.record(name, content, producer_);
    }
    manifest.save(dir_);
  }

 private:
  fs::path dir_;
  std::string producer_;
  std::map<std::string, std::string> files_;
};

class Provenance {
 public:
  Provenance(const std::string& command, const RunConfig& config)
      : doc_{{"tool", "datm"},
             {"version", kVersion},
             {"command", command},
             {"config_sha256", sha256_hex(config_json(config).dump())},
             {"config", config_json(config)},
             {"inputs", json::object()}} {}

  std::string input(const std::string& path, std::string_view producer) {
    std::string content = read_artifact(path, producer);
    doc_["inputs"][fs::path(path).filename().string()] = sha256_hex(content);
    return content;
  }

  const json& doc() const { return doc_; }

 private:
  json doc_;
};

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ConfigError(std::string("missing required flag ") + flag);
}

EmbeddingStore load_store(const RunConfig& c, Provenance& prov) {
  require(c.embedding, "--embedding");
  require(c.counts, "--counts");
  prov.input(c.embedding, "synth (or an external embedding)");
  const std::string counts_text = prov.input(c.counts, "preprocess");
  (void)counts_text;
  EmbeddingStore store = load_embedding(c.embedding, c.counts, c.min_count);
  if (store.size() == 0) throw DataError("no embedding words survive --min-count " + std::to_string(c.min_count));
  return store;
}

FitOptions fit_options(const RunConfig& c) {
  FitOptions o;
  o.k = c.k;
  o.t0 = c.t0;
  o.max_iter = c.max_iter;
  o.seed = c.seed;
  o.sse_tolerance = c.sse_tol;
  o.threads = c.threads;
  o.nonnegative = c.nonnegative;
  return o;
}

json report_json(const QualityReport& r) {
  return json{{"coherence", r.coherence},
              {"coherence_reported", r.reported_coherence()},
              {"diversity", r.diversity},
              {"coverage", r.coverage},
              {"sse", r.sse},
              {"rmse", r.rmse}};
}

json fit_report_json(const FitReport& f) {
  return json{{"iterations_run", f.iterations_run},
              {"sse_per_iteration", f.sse_per_iteration},
              {"initial_sse", f.initial_sse},
              {"final_rmse", f.final_rmse},
              {"reinitialized_atoms", f.reinitialized_atoms},
              {"monotonicity_violations", f.monotonicity_violations}};
}

// ---------------------------------------------------------------------------

int cmd_preprocess(const RunConfig& c) {
  require(c.corpus, "--corpus");
  Provenance prov("preprocess", c);
  prov.input(c.corpus, "an external corpus");
  std::vector<Document> docs = read_raw_corpus(c.corpus);
  const std::size_t read = docs.size();
  if (read == 0) std::cerr << "warning: corpus " << c.corpus << " is empty\n";
  for (int pass = 0; pass < c.phrase_passes && !docs.empty(); ++pass) {
    docs = merge_phrases(docs, c.phrase_threshold, c.phrase_min_count);
  }
  const TermCounts counts = count_terms(docs);
  docs = filter_documents(std::move(docs), c.min_terms);

  json stats = prov.doc();
  stats["documents_read"] = read;
  stats["documents_kept"] = docs.size();
  stats["documents_dropped"] = read - docs.size();
  stats["vocabulary"] = counts.size();

  Outputs out(c.out, "preprocess");
  out.add("corpus.jsonl", serialize_tokenized_corpus(docs));
  std::string counts_text;
  {
    std::vector<std::pair<std::string, std::uint64_t>> rows(counts.begin(), counts.end());
    std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
      return x.second != y.second ? x.second > y.second : x.first < y.first;
    });
    for (const auto& [t, n] : rows) counts_text += t + "\t" + std::to_string(n) + "\n";
  }
  out.add("counts.tsv", counts_text);
  out.add("preprocess.json", stats.dump(2) + "\n");
  out.commit();
  std::cout << fmt::format("documents read {}, kept {}, dropped {} (min_terms={}); vocabulary {}\n",
                           read, docs.size(), read - docs.size(), c.min_terms, counts.size());
  return kOk;
}

int cmd_fit(const RunConfig& c) {
  Provenance prov("fit", c);
  const EmbeddingStore store = load_store(c, prov);
  FitResult result = fit(store, fit_options(c));
  const QualityReport q = evaluate(store, result.dictionary, result.code,
                                   std::min(c.top, store.size()), c.pooled_coherence);
  json header = prov.doc();
  header["seed"] = c.seed;
  header["iterations"] = result.report.iterations_run;
  header["fit_report"] = fit_report_json(result.report);
  header["metrics"] = report_json(q);
  header["metrics"]["top"] = std::min(c.top, store.size());

  Outputs out(c.out, "fit");
  for (auto& [name, content] : render_model(result.dictionary, result.code, store.vocab(), header)) {
    out.add(name, std::move(content));
  }
  out.commit();
  std::cout << fmt::format(
      "K={} t0={} iterations={} sse={:.6g} rmse={:.6g} coherence={:.4f} diversity={:.4f} "
      "coverage={:.4f} reinitialized={}\n",
      result.dictionary.size(), c.t0, result.report.iterations_run, q.sse, q.rmse,
      q.reported_coherence(), q.diversity, q.coverage, result.report.reinitialized_atoms);
  if (result.report.monotonicity_violations) {
    std::cerr << "warning: SSE increased in " << result.report.monotonicity_violations << " iteration(s)\n";
  }
  return kOk;
}

int cmd_sweep(const RunConfig& c) {
  if (c.k_grid.empty()) throw ConfigError("sweep needs --k-grid");
  Provenance prov("sweep", c);
  const EmbeddingStore store = load_store(c, prov);
  std::vector<Eigen::Index> grid(c.k_grid.begin(), c.k_grid.end());
  std::vector<std::uint64_t> seeds = c.seeds.empty() ? std::vector<std::uint64_t>{c.seed} : c.seeds;
  const auto rows = sweep(store, grid, seeds, fit_options(c), std::min(c.top, store.size()),
                          c.pooled_coherence);
  const auto elbows = elbow_candidates(rows);
  Outputs out(c.out, "sweep");
  out.add("sweep.tsv", serialize_sweep(rows, elbows));
  out.add("sweep.json", prov.doc().dump(2) + "\n");
  out.commit();
  std::cout << serialize_sweep(rows, elbows);
  return kOk;
}

int cmd_infer(const RunConfig& c) {
  require(c.corpus, "--corpus");
  require(c.model, "--model");
  Provenance prov("infer", c);
  const EmbeddingStore store = load_store(c, prov);
  const std::vector<Document> docs = parse_tokenized_corpus(prov.input(c.corpus, "preprocess"));
  const LoadedModel model = load_model(c.model, store);
  const SifWeights weights{c.a};

  // Sample contexts for c0 without materializing every window.
  std::vector<std::pair<std::size_t, std::pair<std::size_t, std::size_t>>> units;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (c.window_unit == "document") {
      if (!docs[d].tokens.empty()) units.push_back({d, {0, docs[d].tokens.size()}});
      continue;
    }
    for (const auto& b : window_bounds(docs[d].tokens.size(), c.window, c.stride)) units.push_back({d, b});
  }
  if (units.size() > c.sample_cap) {
    Rng rng = make_stream(c.seed, "sampling");
    auto picks = sample_without_replacement(rng, units.size(), c.sample_cap);
    std::sort(picks.begin(), picks.end());
    decltype(units) kept;
    for (auto i : picks) kept.push_back(units[i]);
    units = std::move(kept);
  }
  std::vector<ContextWindow> sample;
  sample.reserve(units.size());
  for (const auto& [d, b] : units) {
    const auto& toks = docs[d].tokens;
    sample.push_back({docs[d].id, b.first,
                      std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(b.first),
                                               toks.begin() + static_cast<std::ptrdiff_t>(b.second))});
  }
  const GlobalContext global =
      estimate_global_context(sample, store, weights, c.sample_cap, c.seed, c.centered_c0);

  const CodingContext ctx{store, weights, global, model.dictionary};
  const WindowConfig wc{c.window, c.stride,
                        c.count_mode == "disjoint" ? CountMode::kDisjoint : CountMode::kEveryWindow};
  std::vector<TopicAssignment> assignments(docs.size());
  {
    const unsigned threads = std::max(1u, c.threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t d = t; d < docs.size(); d += threads) assignments[d] = code_document(docs[d], ctx, wc);
      });
    }
    for (auto& th : pool) th.join();
  }
  std::string lines;
  std::size_t degenerate = 0;
  for (const auto& a : assignments) {
    lines += serialize_assignment(a) + "\n";
    degenerate += a.degenerate;
  }
  json meta = prov.doc();
  meta["a"] = c.a;
  meta["sample_size"] = global.sample_size;
  meta["seed"] = c.seed;
  meta["window_unit"] = c.window_unit;
  meta["centered"] = c.centered_c0;
  meta["K"] = model.dictionary.size();

  Outputs out(c.out, "infer");
  out.add("assignments.jsonl", lines);
  out.add("global_context.tsv", serialize_global_context(global));
  out.add("global_context.json", meta.dump(2) + "\n");
  out.commit();
  std::cout << fmt::format("coded {} documents ({} without usable windows); c0 from {} contexts\n",
                           docs.size(), degenerate, global.sample_size);
  if (degenerate) std::cerr << "warning: " << degenerate << " documents had no usable window\n";
  return kOk;
}

std::vector<Topic> labelled_topics(const RunConfig& c, const LoadedModel& model,
                                   const EmbeddingStore& store) {
  auto topics = interpret_topics(model.dictionary, store, std::min(c.top, store.size()));
  if (!c.labels.empty()) apply_labels(topics, read_labels(c.labels));
  return topics;
}

int cmd_topics(const RunConfig& c) {
  require(c.model, "--model");
  Provenance prov("topics", c);
  const EmbeddingStore store = load_store(c, prov);
  const LoadedModel model = load_dictionary(c.model);
  const auto topics = labelled_topics(c, model, store);
  Outputs out(c.out, "topics");
  out.add("topics.tsv", serialize_topics(topics));
  out.add("topics.json", prov.doc().dump(2) + "\n");
  out.commit();
  for (const auto& t : topics) {
    std::string terms;
    for (std::size_t i = 0; i < t.top_terms.size() && i < 10; ++i) terms += (i ? " " : "") + t.top_terms[i].term;
    std::cout << t.atom_id << (t.label.empty() ? "" : " [" + t.label + "]") << ": " << terms << "\n";
  }
  return kOk;
}

SemanticDimension load_dimension_file(const RunConfig& c, Provenance& prov, const EmbeddingStore& store) {
  require(c.dimension, "--dimension");
  SemanticDimension dim = load_dimension(prov.input(c.dimension, "synth (or a hand-written spec)"), store);
  for (const auto& t : dim.unresolved) std::cerr << "warning: dimension term '" << t << "' not in vocabulary\n";
  return dim;
}

int cmd_project(const RunConfig& c) {
  require(c.model, "--model");
  Provenance prov("project", c);
  const EmbeddingStore store = load_store(c, prov);
  const LoadedModel model = load_dictionary(c.model);
  const SemanticDimension dim = load_dimension_file(c, prov, store);
  const auto loadings = project_topics(dim, model.dictionary);
  std::map<Eigen::Index, std::string> labels;
  if (!c.labels.empty()) labels = read_labels(c.labels);
  std::string tsv = "atom_id\tlabel\tloading\n";
  for (std::size_t k = 0; k < loadings.size(); ++k) {
    auto it = labels.find(static_cast<Eigen::Index>(k));
    tsv += std::to_string(k) + "\t" + (it == labels.end() ? "" : it->second) + "\t" + format_real(loadings[k]) + "\n";
  }
  Outputs out(c.out, "project");
  out.add("loadings.tsv", tsv);
  out.add("project.json", prov.doc().dump(2) + "\n");
  out.commit();
  std::cout << tsv;
  return kOk;
}

int cmd_analyze(const RunConfig& c) {
  require(c.assignments, "--assignments");
  require(c.groups, "--groups");
  require(c.model, "--model");
  Provenance prov("analyze", c);
  const LoadedModel model = load_dictionary(c.model);
  const auto k = model.dictionary.size();
  const auto assignments = parse_assignments(prov.input(c.assignments, "infer"), k);
  prov.input(c.groups, "synth (or an external group table)");
  const auto group_of = read_groups(c.groups);

  Outputs out(c.out, "analyze");
  const PrevalenceTable table = prevalence_table(assignments, group_of, k);
  const Eigen::MatrixXd shown = c.standardize ? table.standardized() : table.fraction;
  std::string prev = "group\tdocuments";
  for (Eigen::Index j = 0; j < k; ++j) prev += "\t" + std::to_string(j);
  prev += "\n";
  for (std::size_t g = 0; g < table.groups.size(); ++g) {
    prev += table.groups[g] + "\t" + std::to_string(table.group_sizes[g]);
    for (Eigen::Index j = 0; j < k; ++j) prev += "\t" + format_real(shown(static_cast<Eigen::Index>(g), j));
    prev += "\n";
  }
  out.add("prevalence.tsv", prev);

  if (!c.dimension.empty()) {
    if (table.groups.size() < 2) throw ConfigError("prevalence ratio needs at least two groups");
    const std::string group_a = c.group_a.empty() ? table.groups.front() : c.group_a;
    if (std::find(table.groups.begin(), table.groups.end(), group_a) == table.groups.end()) {
      throw ConfigError("--group-a '" + group_a + "' does not occur in " + c.groups);
    }
    std::map<std::string, bool> in_a;
    for (const auto& [doc, g] : group_of) in_a[doc] = g == group_a;
    const EmbeddingStore store = load_store(c, prov);
    const SemanticDimension dim = load_dimension_file(c, prov, store);
    const auto loadings = project_topics(dim, model.dictionary);
    const auto ratios = prevalence_ratio(assignments, in_a, k);
    std::map<Eigen::Index, std::string> labels;
    if (!c.labels.empty()) labels = read_labels(c.labels);
    std::string tsv = "atom_id\tlabel\tloading\tprevalence_A\tprevalence_B\tratio\n";
    std::vector<double> xs, ys;
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto& r = ratios[static_cast<std::size_t>(j)];
      auto it = labels.find(j);
      tsv += std::to_string(j) + "\t" + (it == labels.end() ? "" : it->second) + "\t" +
             format_real(loadings[static_cast<std::size_t>(j)]) + "\t" + format_real(r.prevalence_a) + "\t" +
             format_real(r.prevalence_b) + "\t" + (r.ratio ? format_real(*r.ratio) : "NA") + "\n";
      xs.push_back(loadings[static_cast<std::size_t>(j)]);
      ys.push_back(r.ratio ? *r.ratio : std::numeric_limits<double>::quiet_NaN());
    }
    const SpearmanResult s = spearman(xs, ys);
    json summary = prov.doc();
    summary["rho"] = s.rho;
    summary["p"] = s.p_value;
    summary["n"] = s.n;
    summary["group_a"] = group_a;
    summary["dimension"] = dim.name;
    out.add("analysis.tsv", tsv);
    out.add("analysis_summary.json", summary.dump(2) + "\n");
    std::cout << fmt::format("spearman rho={:.6f} p={:.3g} n={} (group A = {})\n", s.rho, s.p_value, s.n, group_a);
  }
  out.add("analyze.json", prov.doc().dump(2) + "\n");
  out.commit();
  return kOk;
}

int cmd_synth(const RunConfig& c) {
  SynthSpec spec;
  spec.k_true = c.k_true;
  spec.dims = c.dims;
  spec.vocab = c.vocab;
  spec.t0_true = c.t0_true;
  spec.noise = c.noise;
  spec.docs = c.docs;
  spec.doc_length = c.doc_length;
  spec.emission_scale = c.emission_scale;
  spec.unigram_mix = c.unigram_mix;
  spec.global_weight = c.global_weight;
  spec.dimension_strength = c.dimension_strength;
  spec.group_bias = c.group_bias;
  spec.positive_coefficients = c.positive_coefficients;
  spec.seed = c.seed;
  const SynthData data = synthesize(spec);

  Outputs out(c.out, "synth");
  out.add("embedding.txt", serialize_embedding(data.words, data.embedding));
  std::string counts;
  for (const auto& w : data.words) counts += w + "\t" + std::to_string(data.counts.at(w)) + "\n";
  out.add("counts.tsv", counts);
  out.add("corpus.jsonl", serialize_tokenized_corpus(data.corpus));
  std::string groups, topics;
  for (std::size_t d = 0; d < data.corpus.size(); ++d) {
    groups += data.corpus[d].id + "\t" + data.doc_groups[d] + "\n";
    topics += data.corpus[d].id + "\t" + std::to_string(data.doc_topics[d]) + "\n";
  }
  out.add("groups.tsv", groups);
  out.add("truth_doc_topics.tsv", topics);
  out.add("truth_atoms.tsv", serialize_atoms(AtomDictionary(data.atoms)));
  std::string supports;
  for (std::size_t w = 0; w < data.words.size(); ++w) {
    for (const auto& e : data.supports[w]) {
      supports += data.words[w] + "\t" + std::to_string(e.atom) + "\t" + format_real(e.coefficient) + "\n";
    }
  }
  out.add("truth_word_supports.tsv", supports);
  if (!data.positive_poles.empty()) {
    out.add("dimension.json",
            json{{"name", "planted"}, {"positive", data.positive_poles}, {"negative", data.negative_poles}}.dump(2) + "\n");
  }
  json meta = Provenance("synth", c).doc();
  meta["V"] = data.words.size();
  out.add("synth.json", meta.dump(2) + "\n");
  out.commit();
  std::cout << fmt::format("synthesized V={} N={} K_true={} docs={}\n", data.words.size(), spec.dims,
                           spec.k_true, data.corpus.size());
  return kOk;
}

void add_options(CLI::App& app, RunConfig& c) {
  app.add_option("--corpus", c.corpus, "Corpus (raw JSONL/text for preprocess, tokenized JSONL for infer)");
  app.add_option("--embedding", c.embedding, "Embedding text file ('V N' header)");
  app.add_option("--counts", c.counts, "Term counts TSV");
  app.add_option("--model", c.model, "Model directory written by fit");
  app.add_option("--out", c.out, "Output directory")->capture_default_str();
  app.add_option("--labels", c.labels, "Topic labels TSV (atom_id, label)");
  app.add_option("--dimension", c.dimension, "Dimension spec JSON {name, positive, negative}");
  app.add_option("--groups", c.groups, "Group TSV (doc_id, group)");
  app.add_option("--assignments", c.assignments, "assignments.jsonl written by infer");
  app.add_option("--group-a,--group_a", c.group_a, "Group forming the numerator of the prevalence ratio");

  app.add_option("--k", c.k, "Number of atoms")->check(CLI::Range(2LL, 1LL << 40));
  app.add_option("--t0", c.t0, "Sparsity constraint")->capture_default_str()->check(CLI::Range(1, 1 << 20));
  app.add_option("--max-iter,--max_iter", c.max_iter, "K-SVD iterations")->capture_default_str()->check(CLI::Range(1, 1 << 20));
  app.add_option("--a", c.a, "SIF smoothing parameter")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--window", c.window, "Context window length")->capture_default_str()->check(CLI::Range(std::size_t{1}, std::size_t{1} << 30));
  app.add_option("--stride", c.stride, "Window stride")->capture_default_str()->check(CLI::Range(std::size_t{1}, std::size_t{1} << 30));
  app.add_option("--min-count,--min_count", c.min_count, "Minimum term count for embedding words")->capture_default_str();
  app.add_option("--min-terms,--min_terms", c.min_terms, "Minimum tokens per retained document")->capture_default_str();
  app.add_option("--top", c.top, "Terms per topic")->capture_default_str()->check(CLI::Range(std::size_t{1}, std::size_t{1} << 30));
  app.add_option("--seed", c.seed, "Seed for every random stream")->capture_default_str();
  app.add_option("--threads", c.threads, "Worker threads")->capture_default_str()->check(CLI::Range(1u, 1024u));
  app.add_option("--sse-tol,--sse_tol", c.sse_tol, "Absolute SSE stopping threshold")->capture_default_str()->check(CLI::NonNegativeNumber);
  app.add_option("--sample-cap,--sample_cap", c.sample_cap, "Contexts sampled for c0")->capture_default_str()->check(CLI::Range(std::size_t{2}, std::size_t{1} << 40));
  app.add_option("--phrase-threshold,--phrase_threshold", c.phrase_threshold, "Collocation score threshold")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--phrase-min-count,--phrase_min_count", c.phrase_min_count, "Collocation count discount")->capture_default_str();
  app.add_option("--phrase-passes,--phrase_passes", c.phrase_passes, "Phrase merge passes (2 forms trigrams)")->capture_default_str()->check(CLI::Range(0, 8));
  app.add_option("--k-grid,--k_grid", c.k_grid, "K values for sweep")->delimiter(',')->check(CLI::Range(2LL, 1LL << 40));
  app.add_option("--seeds", c.seeds, "Seeds for sweep")->delimiter(',');
  app.add_flag("--nonnegative", c.nonnegative, "Constrain sparse coefficients to be nonnegative");
  app.add_flag("--pooled-coherence,--pooled_coherence", c.pooled_coherence, "Pool all pairs across topics");
  app.add_flag("--centered-c0,--centered_c0", c.centered_c0, "Mean-center contexts before estimating c0");
  app.add_option("--window-unit,--window_unit", c.window_unit, "Context unit for c0: window or document")->capture_default_str()->check(CLI::IsMember({"window", "document"}));
  app.add_option("--count-mode,--count_mode", c.count_mode, "Distribution counting: every or disjoint")->capture_default_str()->check(CLI::IsMember({"every", "disjoint"}));
  app.add_flag("--standardize", c.standardize, "Z-score prevalence across groups");

  app.add_option("--k-true,--k_true", c.k_true, "synth: planted atoms")->capture_default_str();
  app.add_option("--dims", c.dims, "synth: embedding dimension")->capture_default_str();
  app.add_option("--vocab", c.vocab, "synth: vocabulary size")->capture_default_str();
  app.add_option("--t0-true,--t0_true", c.t0_true, "synth: atoms per word")->capture_default_str();
  app.add_option("--noise", c.noise, "synth: Gaussian noise sigma")->capture_default_str()->check(CLI::NonNegativeNumber);
  app.add_option("--docs", c.docs, "synth: documents to emit")->capture_default_str();
  app.add_option("--doc-length,--doc_length", c.doc_length, "synth: tokens per document")->capture_default_str();
  app.add_option("--emission-scale,--emission_scale", c.emission_scale, "synth: gist scale in the emission softmax")->capture_default_str();
  app.add_option("--unigram-mix,--unigram_mix", c.unigram_mix, "synth: background unigram share")->capture_default_str();
  app.add_option("--global-weight,--global_weight", c.global_weight, "synth: shared direction weight")->capture_default_str();
  app.add_option("--dimension-strength,--dimension_strength", c.dimension_strength, "synth: atom lean along a hidden dimension")->capture_default_str();
  app.add_option("--group-bias,--group_bias", c.group_bias, "synth: group A topic preference along the lean")->capture_default_str();
  app.add_flag("--positive-coefficients,--positive_coefficients", c.positive_coefficients, "synth: nonnegative planted coefficients");
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Discourse atom topic modeling"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "Flat key=value configuration file");
  app.require_subcommand(1, 1);
  RunConfig c;
  add_options(app, c);

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"preprocess", "Tokenize, merge phrases, filter documents, count terms"},
      {"fit", "Learn the atom dictionary by K-SVD"},
      {"sweep", "Fit and score a grid of K values"},
      {"infer", "Estimate c0 and code documents as topic sequences"},
      {"topics", "List the nearest terms of every atom"},
      {"project", "Project atoms onto a semantic dimension"},
      {"analyze", "Group prevalence, prevalence ratios and Spearman correlation"},
      {"synth", "Generate planted validation data"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (c.t0 > c.k && c.k > 0) throw ConfigError("--t0 must not exceed --k");
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "preprocess") return cmd_preprocess(c);
    if (cmd == "fit") {
      if (c.k == 0) throw ConfigError("fit needs --k");
      return cmd_fit(c);
    }
    if (cmd == "sweep") return cmd_sweep(c);
    if (cmd == "infer") return cmd_infer(c);
    if (cmd == "topics") return cmd_topics(c);
    if (cmd == "project") return cmd_project(c);
    if (cmd == "analyze") return cmd_analyze(c);
    if (cmd == "synth") return cmd_synth(c);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumericError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  }
  return kConfigError;
}

}  // namespace datm::cli
