// topigen: command-line pipeline around the topigen library.
//
// Subcommands: ingest, profile, generalize, render, annotate. All outputs are
// deterministic for identical inputs; apart from `annotate` (which flushes
// per line to preserve partial progress), nothing is written to an output
// path unless the whole command succeeds.
//
// Exit codes: 0 ok, 1 parse/schema/config error, 2 I/O error, 3 index
// version mismatch, 4 network error.

#include "topigen/annotator.hpp"
#include "topigen/topigen.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitIndexVersion = 3;
constexpr int kExitNetwork = 4;

template <typename Fn>
int run_guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const topigen::IndexVersionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIndexVersion;
  } catch (const topigen::TransportError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNetwork;
  } catch (const topigen::ProtocolError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNetwork;
  } catch (const topigen::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const topigen::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

void require_readable(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw topigen::IoError("cannot open " + path.string() + " for reading");
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Callers write results
/// into pre-sized slots, so output order stays the input order.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  if (jobs < 1) throw topigen::ConfigError("--jobs must be >= 1");
  const std::size_t workers = std::min<std::size_t>(jobs, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string safe_file_stem(const std::string& user_id) {
  if (user_id.empty() || user_id == "." || user_id == ".." ||
      user_id.find_first_of("/\\") != std::string::npos) {
    throw topigen::IntegrityError("user_id '" + user_id +
                                  "' cannot be used as an output file name");
  }
  return user_id;
}

// --- ingest ----------------------------------------------------------------

struct IngestOptions {
  std::string subject, broader, labels, ntriples, out;
};

int cmd_ingest(const IngestOptions& opt) {
  const bool tsv_mode = !opt.subject.empty() || !opt.broader.empty();
  if (!opt.ntriples.empty() && tsv_mode) {
    throw topigen::ConfigError("--ntriples cannot be combined with --subject/--broader/--labels");
  }
  if (opt.ntriples.empty() && (opt.subject.empty() || opt.broader.empty())) {
    throw topigen::ConfigError("ingest needs --subject and --broader, or --ntriples");
  }
  topigen::IngestStats stats;
  topigen::CategoryGraph graph;
  if (!opt.ntriples.empty()) {
    require_readable(opt.ntriples);
    graph = topigen::ingest_ntriples_subset(opt.ntriples, &stats);
  } else {
    require_readable(opt.subject);
    require_readable(opt.broader);
    std::optional<fs::path> labels;
    if (!opt.labels.empty()) {
      require_readable(opt.labels);
      labels = fs::path(opt.labels);
    }
    graph = topigen::ingest_tsv(opt.subject, opt.broader, labels, &stats);
  }
  topigen::save_index(graph, opt.out);
  std::cout << json{{"articles", stats.articles},
                    {"categories", stats.categories},
                    {"subject_edges", stats.subject_edges},
                    {"broader_edges", stats.broader_edges},
                    {"duplicates_dropped", stats.duplicates_dropped},
                    {"triples_skipped", stats.triples_skipped},
                    {"invalid_skipped", stats.invalid_skipped},
                    {"labels", stats.labels},
                    {"index", opt.out}}
                .dump()
            << "\n";
  return 0;
}

// --- profile -----------------------------------------------------------------

struct ProfileOptions {
  std::string docs, out, user;
};

int cmd_profile(const ProfileOptions& opt) {
  require_readable(opt.docs);
  const auto docs = topigen::load_annotated_documents(opt.docs);
  std::vector<std::string> user_ids;
  if (!opt.user.empty()) {
    user_ids.push_back(opt.user);
  } else {
    std::set<std::string> seen;
    for (const auto& d : docs) seen.insert(d.user_id);
    user_ids.assign(seen.begin(), seen.end());
  }
  std::vector<std::string> warnings;
  std::vector<topigen::TopicProfile> profiles;
  profiles.reserve(user_ids.size());
  for (const std::string& user : user_ids) {
    profiles.push_back(topigen::build_profile(docs, user, &warnings));
  }
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  topigen::save_profiles(profiles, opt.out);
  std::cout << json{{"profiles", profiles.size()}, {"out", opt.out}}.dump() << "\n";
  return 0;
}

// --- generalize --------------------------------------------------------------

struct GeneralizeOptions {
  std::string graph, profiles, out;
  topigen::GeneralizationConfig config;
  int jobs = 1;
};

int cmd_generalize(const GeneralizeOptions& opt) {
  opt.config.validate();
  require_readable(opt.graph);
  require_readable(opt.profiles);
  const topigen::CategoryGraph graph = topigen::load_index(opt.graph);
  const auto profiles = topigen::load_profiles(opt.profiles);
  std::vector<topigen::ClusterSet> results(profiles.size());
  parallel_for(profiles.size(), opt.jobs, [&](std::size_t i) {
    results[i] = topigen::generalize(graph, profiles[i], opt.config);
  });
  topigen::save_cluster_sets(results, opt.out);
  std::cout << json{{"cluster_sets", results.size()}, {"out", opt.out}}.dump() << "\n";
  return 0;
}

// --- render ------------------------------------------------------------------

struct RenderOptions {
  std::string profiles, clusters, out_dir;
  std::string mode = "flat";
  std::string format = "json";
  int k = 3;
  int jobs = 1;
};

int cmd_render(const RenderOptions& opt) {
  const auto mode = topigen::layout_mode_from_string(opt.mode);
  if (!mode) throw topigen::ConfigError("unknown mode '" + opt.mode + "'");
  if (opt.format != "json" && opt.format != "html") {
    throw topigen::ConfigError("unknown format '" + opt.format + "'");
  }
  if (opt.k < 1) throw topigen::ConfigError("k must be >= 1");
  require_readable(opt.profiles);
  const auto profiles = topigen::load_profiles(opt.profiles);

  std::map<std::string, topigen::ClusterSet> clusters_by_user;
  if (*mode != topigen::LayoutMode::flat) {
    if (opt.clusters.empty()) {
      throw topigen::ConfigError("--clusters is required for nested/clustered modes");
    }
    require_readable(opt.clusters);
    for (auto& cs : topigen::load_cluster_sets(opt.clusters)) {
      clusters_by_user[cs.user_id] = std::move(cs);
    }
  }

  std::vector<std::pair<std::string, std::string>> outputs(profiles.size());
  parallel_for(profiles.size(), opt.jobs, [&](std::size_t i) {
    const topigen::TopicProfile& p = profiles[i];
    topigen::ProfileLayout layout;
    switch (*mode) {
      case topigen::LayoutMode::flat:
        layout = topigen::render_flat(p);
        break;
      case topigen::LayoutMode::nested:
      case topigen::LayoutMode::clustered: {
        auto it = clusters_by_user.find(p.user_id);
        if (it == clusters_by_user.end()) {
          throw topigen::IntegrityError("no cluster set for user '" + p.user_id +
                                        "' in " + opt.clusters);
        }
        layout = *mode == topigen::LayoutMode::nested
                     ? topigen::render_nested(p, it->second)
                     : topigen::render_clustered(p, it->second, opt.k);
        break;
      }
    }
    const std::string name = safe_file_stem(p.user_id) + "." + opt.format;
    outputs[i] = {name, opt.format == "json" ? topigen::to_json(layout)
                                             : topigen::to_html(layout)};
  });

  std::error_code ec;
  fs::create_directories(opt.out_dir, ec);
  if (ec) throw topigen::IoError("cannot create directory " + opt.out_dir);
  for (const auto& [name, bytes] : outputs) {
    topigen::write_file_atomic(fs::path(opt.out_dir) / name, bytes);
  }
  std::cout << json{{"files", outputs.size()}, {"out_dir", opt.out_dir}}.dump() << "\n";
  return 0;
}

// --- annotate ------------------------------------------------------------------

struct AnnotateOptions {
  std::string docs, out, service_url;
  double confidence = 0.5;
};

int cmd_annotate(const AnnotateOptions& opt) {
  std::string url = opt.service_url;
  if (url.empty()) {
    if (const char* env = std::getenv("TOPIGEN_ANNOTATOR_URL")) url = env;
  }
  if (url.empty()) {
    throw topigen::ConfigError(
        "no annotation service configured (use --service-url or TOPIGEN_ANNOTATOR_URL)");
  }
  require_readable(opt.docs);
  const auto docs = topigen::load_raw_documents(opt.docs);
  for (const auto& d : docs) {
    if (d.text.empty()) {
      throw topigen::ConfigError("doc '" + d.doc_id + "' has empty text; nothing to annotate");
    }
  }
  const topigen::AnnotatorClient client(url, opt.confidence);
  // Streaming output: one line per document, flushed as soon as it is
  // annotated, so partial progress survives a mid-run network failure.
  std::ofstream out(opt.out, std::ios::binary | std::ios::trunc);
  if (!out) throw topigen::IoError("cannot open " + opt.out + " for writing");
  std::size_t annotated = 0;
  for (const auto& d : docs) {
    const topigen::AnnotatedDocument result = client.annotate(d);
    out << topigen::annotated_document_to_json(result).dump() << "\n";
    out.flush();
    if (!out) throw topigen::IoError("error while writing " + opt.out);
    ++annotated;
  }
  std::cout << json{{"documents", annotated}, {"out", opt.out}}.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalize topical user profiles against a category graph and render them"};
  app.require_subcommand(1);

  IngestOptions ingest_opt;
  CLI::App* ingest = app.add_subcommand(
      "ingest", "Load category-graph dumps and write a reusable binary index");
  ingest->add_option("--subject", ingest_opt.subject, "TSV of article<TAB>category edges");
  ingest->add_option("--broader", ingest_opt.broader, "TSV of category<TAB>category edges");
  ingest->add_option("--labels", ingest_opt.labels, "TSV of id<TAB>label lines");
  ingest->add_option("--ntriples", ingest_opt.ntriples,
                     "N-Triples file (subject/broader predicates consumed, rest skipped)");
  ingest->add_option("--out", ingest_opt.out, "Output index path")->required();

  ProfileOptions profile_opt;
  CLI::App* profile = app.add_subcommand(
      "profile", "Aggregate annotated documents into weighted topic profiles");
  profile->add_option("--docs", profile_opt.docs, "JSON-lines of annotated documents")
      ->required();
  profile->add_option("--out", profile_opt.out, "Output profiles JSON-lines")->required();
  profile->add_option("--user", profile_opt.user, "Build only this user's profile");

  GeneralizeOptions gen_opt;
  CLI::App* generalize = app.add_subcommand(
      "generalize", "Pair groups of profile topics with categories (one line per profile)");
  generalize->add_option("--graph", gen_opt.graph, "Graph index from 'ingest'")->required();
  generalize->add_option("--profiles", gen_opt.profiles, "Profiles JSON-lines")->required();
  generalize->add_option("-m,--max-edges", gen_opt.config.m,
                         "Traversal bound: subject edge plus up to m-1 broader edges");
  generalize->add_option("--kappa", gen_opt.config.kappa, "Tie-penalty constant");
  generalize->add_option("--jobs", gen_opt.jobs, "Worker threads across profiles");
  generalize->add_option("--out", gen_opt.out, "Output cluster sets JSON-lines")->required();

  RenderOptions render_opt;
  CLI::App* render = app.add_subcommand("render", "Render profiles as JSON or static HTML");
  render->add_option("--profiles", render_opt.profiles, "Profiles JSON-lines")->required();
  render->add_option("--clusters", render_opt.clusters,
                     "Cluster sets JSON-lines (nested/clustered modes)");
  render->add_option("--mode", render_opt.mode, "flat | nested | clustered");
  render->add_option("--format", render_opt.format, "json | html");
  render->add_option("-k,--top-k", render_opt.k, "Clustered mode: topics shown per cluster");
  render->add_option("--jobs", render_opt.jobs, "Worker threads across profiles");
  render->add_option("--out-dir", render_opt.out_dir, "Output directory")->required();

  AnnotateOptions annotate_opt;
  CLI::App* annotate = app.add_subcommand(
      "annotate", "Send raw documents to a Spotlight-compatible annotation service");
  annotate->add_option("--docs", annotate_opt.docs, "JSON-lines of raw documents")->required();
  annotate->add_option("--out", annotate_opt.out, "Output annotated JSON-lines")->required();
  annotate->add_option("--service-url", annotate_opt.service_url,
                       "Annotation endpoint (or env TOPIGEN_ANNOTATOR_URL)");
  annotate->add_option("--confidence", annotate_opt.confidence, "Annotation confidence [0,1]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (ingest->parsed()) return run_guarded([&] { return cmd_ingest(ingest_opt); });
  if (profile->parsed()) return run_guarded([&] { return cmd_profile(profile_opt); });
  if (generalize->parsed()) return run_guarded([&] { return cmd_generalize(gen_opt); });
  if (render->parsed()) return run_guarded([&] { return cmd_render(render_opt); });
  if (annotate->parsed()) return run_guarded([&] { return cmd_annotate(annotate_opt); });
  return kExitUsage;
}
