#include "tailgen/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "tailgen/balance_mix.hpp"
#include "tailgen/cache.hpp"
#include "tailgen/errors.hpp"
#include "tailgen/evaluation.hpp"
#include "tailgen/hashing.hpp"
#include "tailgen/http_backend.hpp"
#include "tailgen/journal.hpp"
#include "tailgen/mock_backend.hpp"
#include "tailgen/parallel.hpp"
#include "tailgen/templates.hpp"

namespace tailgen {

namespace fs = std::filesystem;

namespace {

constexpr const char* kConfigFile = "config.txt";
constexpr const char* kJournalFile = "journal.tsv";

std::string fmt_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::vector<std::string> split_tabs(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto p = s.find('\t', start);
    if (p == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, p - start));
    start = p + 1;
  }
}

/// Read an artifact line by line, dispatching pre-split fields.
void for_each_row(const fs::path& path, std::size_t columns,
                  const std::function<void(const std::vector<std::string>&, int)>& fn) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open artifact: " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != columns) {
      throw ParseError(path.filename().string() + " line " + std::to_string(line_no) +
                           ": expected " + std::to_string(columns) + " fields, got " +
                           std::to_string(fields.size()),
                       line, line_no);
    }
    fn(fields, line_no);
  }
}

int to_int(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(std::string("bad integer in artifact (") + what + "): '" + s + "'");
  }
}

double to_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(std::string("bad number in artifact (") + what + "): '" + s + "'");
  }
}

struct ExpansionMeta {
  int class_id = -1;
  std::string status;
  int expand_rounds = 0;
  int dedup_rounds = 0;
  int captioned = 0;
  int list_size = 0;
};

bool artifact_ok(const RunJournal& journal, const fs::path& out, const std::string& stage,
                 const std::string& rel) {
  std::string sealed = journal.sealed_hash(stage);
  if (sealed.empty()) return false;
  fs::path p = out / rel;
  std::error_code ec;
  if (!fs::exists(p, ec)) return false;
  return hash_file(p) == sealed;
}

// --- artifact serialization -----------------------------------------------------

std::string descriptions_text(const std::vector<DescriptionList>& lists) {
  std::ostringstream os;
  for (const auto& list : lists) {
    for (const auto& d : list.items) {
      os << list.class_id << '\t' << origin_name(d.origin) << '\t' << d.revision << '\t'
         << d.raw_text << '\n';
    }
  }
  return os.str();
}

std::vector<DescriptionList> load_descriptions(const fs::path& path,
                                               const DatasetManifest& manifest) {
  std::vector<DescriptionList> lists(static_cast<std::size_t>(manifest.num_classes));
  for (int i = 0; i < manifest.num_classes; ++i) {
    lists[static_cast<std::size_t>(i)].class_id = i;
  }
  for_each_row(path, 4, [&](const std::vector<std::string>& f, int) {
    int cid = to_int(f[0], "class_id");
    if (cid < 0 || cid >= manifest.num_classes) {
      throw ValidationError("description row names unknown class " + f[0]);
    }
    Description d = parse_template1(f[3], manifest.class_by_id(cid).label);
    d.class_id = cid;
    d.origin = origin_from_name(f[1]);
    d.revision = to_int(f[2], "revision");
    lists[static_cast<std::size_t>(cid)].items.push_back(std::move(d));
  });
  return lists;
}

std::string expansion_meta_text(const std::vector<ExpansionMeta>& meta) {
  std::ostringstream os;
  for (const auto& m : meta) {
    os << m.class_id << '\t' << m.status << '\t' << m.expand_rounds << '\t' << m.dedup_rounds
       << '\t' << m.captioned << '\t' << m.list_size << '\n';
  }
  return os.str();
}

std::vector<ExpansionMeta> load_expansion_meta(const fs::path& path,
                                               const DatasetManifest& manifest) {
  std::vector<ExpansionMeta> meta(static_cast<std::size_t>(manifest.num_classes));
  std::vector<bool> seen(meta.size(), false);
  for_each_row(path, 6, [&](const std::vector<std::string>& f, int) {
    ExpansionMeta m;
    m.class_id = to_int(f[0], "class_id");
    if (m.class_id < 0 || m.class_id >= manifest.num_classes) {
      throw ValidationError("expansion row names unknown class " + f[0]);
    }
    expansion_status_from_name(f[1]);  // validate
    m.status = f[1];
    m.expand_rounds = to_int(f[2], "expand_rounds");
    m.dedup_rounds = to_int(f[3], "dedup_rounds");
    m.captioned = to_int(f[4], "captioned");
    m.list_size = to_int(f[5], "list_size");
    seen[static_cast<std::size_t>(m.class_id)] = true;
    meta[static_cast<std::size_t>(m.class_id)] = std::move(m);
  });
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      throw ValidationError("expansion state missing class " + std::to_string(i));
    }
  }
  return meta;
}

std::string templates_text(const std::vector<ClassFeatureTemplate>& anchors) {
  std::ostringstream os;
  for (const auto& t : anchors) {
    os << t.class_id << '\t' << (t.features.empty() ? "bare" : "summary") << '\t'
       << t.rendered << '\n';
  }
  return os.str();
}

std::map<int, ClassFeatureTemplate> load_templates(const fs::path& path,
                                                   const DatasetManifest& manifest) {
  std::map<int, ClassFeatureTemplate> anchors;
  for_each_row(path, 3, [&](const std::vector<std::string>& f, int) {
    int cid = to_int(f[0], "class_id");
    if (cid < 0 || cid >= manifest.num_classes) {
      throw ValidationError("template row names unknown class " + f[0]);
    }
    ClassFeatureTemplate t;
    if (f[1] == "summary") {
      t = parse_template2(f[2], manifest.class_by_id(cid).label);
    } else if (f[1] == "bare") {
      t.rendered = f[2];
    } else {
      throw ValidationError("unknown template kind: " + f[1]);
    }
    t.class_id = cid;
    anchors[cid] = std::move(t);
  });
  return anchors;
}

std::string generated_text(const std::vector<GeneratedImage>& rows) {
  std::ostringstream os;
  for (const auto& g : rows) {
    os << g.image_id << '\t' << g.class_id << '\t' << g.buffer_ref << '\t'
       << g.description.raw_text << '\n';
  }
  return os.str();
}

std::vector<GeneratedImage> load_generated(const fs::path& path,
                                           const DatasetManifest& manifest) {
  std::vector<GeneratedImage> rows;
  for_each_row(path, 4, [&](const std::vector<std::string>& f, int) {
    GeneratedImage g;
    g.image_id = f[0];
    g.class_id = to_int(f[1], "class_id");
    if (g.class_id < 0 || g.class_id >= manifest.num_classes) {
      throw ValidationError("generated row names unknown class " + f[1]);
    }
    g.buffer_ref = f[2];
    g.description = parse_template1(f[3], manifest.class_by_id(g.class_id).label);
    g.description.class_id = g.class_id;
    g.description.origin = DescriptionOrigin::Expanded;
    g.cycle = 1;
    g.status = ImageStatus::Pending;
    rows.push_back(std::move(g));
  });
  return rows;
}

std::string images_text(const std::vector<GeneratedImage>& rows) {
  std::ostringstream os;
  for (const auto& g : rows) {
    os << g.image_id << '\t' << g.class_id << '\t' << image_status_name(g.status) << '\t'
       << g.cycle << '\t' << g.description.revision << '\t' << g.buffer_ref << '\t'
       << fmt_score(g.last_score) << '\t' << g.description.raw_text << '\n';
  }
  return os.str();
}

std::vector<GeneratedImage> load_images(const fs::path& path,
                                        const DatasetManifest& manifest) {
  std::vector<GeneratedImage> rows;
  for_each_row(path, 8, [&](const std::vector<std::string>& f, int) {
    GeneratedImage g;
    g.image_id = f[0];
    g.class_id = to_int(f[1], "class_id");
    if (g.class_id < 0 || g.class_id >= manifest.num_classes) {
      throw ValidationError("image row names unknown class " + f[1]);
    }
    g.status = image_status_from_name(f[2]);
    g.cycle = to_int(f[3], "cycle");
    g.buffer_ref = f[5];
    g.last_score = to_double(f[6], "last_score");
    g.description = parse_template1(f[7], manifest.class_by_id(g.class_id).label);
    g.description.class_id = g.class_id;
    g.description.revision = to_int(f[4], "revision");
    g.description.origin = g.description.revision > 0 ? DescriptionOrigin::Refined
                                                      : DescriptionOrigin::Expanded;
    rows.push_back(std::move(g));
  });
  return rows;
}

std::string eval_journal_text(const std::vector<EvalRecord>& records) {
  std::ostringstream os;
  for (const auto& r : records) {
    os << r.image_id << '\t' << r.cycle << '\t' << fmt_score(r.score) << '\t'
       << (r.pass ? "pass" : "fail") << '\n';
  }
  return os.str();
}

std::string accepted_pool_text(const std::vector<GeneratedImage>& rows) {
  std::ostringstream os;
  for (const auto& g : rows) {
    if (g.status != ImageStatus::Accepted) continue;
    os << g.image_id << '\t' << g.class_id << '\t' << g.description.revision << '\t'
       << g.buffer_ref << '\t' << fmt_score(g.last_score) << '\n';
  }
  return os.str();
}

int count_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return 0;
  int n = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++n;
  }
  return n;
}

// --- backend stack ----------------------------------------------------------------

struct Stack {
  BackendPtr backend;
  BackendStatsPtr stats;
};

Stack build_stack(const PipelineConfig& cfg, const fs::path& out, ClockPtr clock,
                  const PipelineHooks& hooks) {
  auto stats = std::make_shared<BackendStats>();

  std::shared_ptr<MockBackend> mock;
  std::shared_ptr<HttpBackend> http;
  auto base_for = [&](std::string_view slot) -> BackendPtr {
    if (cfg.backend_for(slot) == BackendImpl::Mock) {
      if (!mock) {
        MockBackendConfig mc = cfg.mock;
        mc.seed = cfg.seed;
        mock = std::make_shared<MockBackend>(mc);
      }
      return mock;
    }
    if (!http) http = std::make_shared<HttpBackend>(cfg.http);
    return http;
  };

  std::map<RequestKind, BackendPtr> impls{
      {RequestKind::Caption, base_for("caption")},
      {RequestKind::Expand, base_for("expand")},
      {RequestKind::Summarize, base_for("summarize")},
      {RequestKind::Refine, base_for("refine")},
      {RequestKind::GenerateImage, base_for("generate")},
      {RequestKind::EmbedImage, base_for("embed")},
      {RequestKind::EmbedText, base_for("embed")},
  };

  BackendPtr stack = std::make_shared<DispatchBackend>(std::move(impls), stats);
  if (hooks.wrap_dispatch) stack = hooks.wrap_dispatch(stack);
  stack = std::make_shared<RetryingBackend>(stack, cfg.retry, clock, stats);
  auto image_limiter = std::make_shared<RateLimiter>(cfg.image_limit, clock);
  auto text_limiter = std::make_shared<RateLimiter>(cfg.text_limit, clock);
  stack = std::make_shared<ThrottledBackend>(stack, image_limiter, text_limiter);
  fs::path cache_dir = cfg.cache_dir.empty() ? out / "cache" : fs::path(cfg.cache_dir);
  auto cache = std::make_shared<ResponseCache>(cache_dir, cfg.cache_enabled);
  stack = std::make_shared<CachingBackend>(stack, cache, stats);
  return {stack, stats};
}

RunSummary run_impl(const PipelineConfig& cfg, std::optional<std::string> manifest_path,
                    const fs::path& out, const PipelineHooks& hooks) {
  cfg.validate();
  fs::create_directories(out / "stage");

  ClockPtr clock = hooks.clock;
  if (!clock) {
    if (cfg.simulated_clock) {
      clock = std::make_shared<SimulatedClock>();
    } else {
      clock = std::make_shared<SystemClock>();
    }
  }

  fs::path cfg_path = out / kConfigFile;
  if (fs::exists(cfg_path)) {
    PipelineConfig persisted = load_config(cfg_path.string());
    if (!(persisted == cfg)) {
      throw ValidationError("run directory " + out.string() +
                            " holds a different configuration; use a fresh directory");
    }
  } else {
    save_config(cfg, cfg_path.string());
  }

  RunJournal journal = RunJournal::open(out / kJournalFile, clock);
  journal.append("run", "-", "started");

  Stack stack = build_stack(cfg, out, clock, hooks);
  BackendClient client(stack.backend);

  EventSink sink = [&journal](const StageEvent& ev) {
    journal.append(ev.stage, ev.class_id >= 0 ? "class:" + std::to_string(ev.class_id) : "-",
                   ev.outcome);
  };

  // ---- ingest
  DatasetManifest manifest;
  if (artifact_ok(journal, out, "manifest", "stage/manifest.tsv")) {
    manifest = load_manifest((out / "stage/manifest.tsv").string());
  } else {
    if (!manifest_path) {
      throw ValidationError("nothing to resume in " + out.string() +
                            ": no sealed manifest");
    }
    manifest = load_manifest(*manifest_path);
    std::ostringstream os;
    serialize_manifest(manifest, os);
    write_file_atomic(out / "stage/manifest.tsv", os.str());
    journal.seal_stage("manifest", hash_file(out / "stage/manifest.tsv"));
  }
  auto num_classes = static_cast<std::size_t>(manifest.num_classes);

  ExpansionConfig ecfg;
  ecfg.per_class_cap = cfg.per_class_cap;
  ecfg.batch_size = cfg.batch_size;
  ecfg.run_seed = cfg.seed;

  // ---- captions + list expansion
  std::vector<DescriptionList> lists;
  std::vector<ExpansionMeta> meta;
  if (artifact_ok(journal, out, "descriptions", "stage/descriptions.tsv") &&
      artifact_ok(journal, out, "expansion_state", "stage/expansion_state.tsv")) {
    lists = load_descriptions(out / "stage/descriptions.tsv", manifest);
    meta = load_expansion_meta(out / "stage/expansion_state.tsv", manifest);
  } else {
    auto quotas = generation_quota(manifest, cfg.per_class_cap);
    lists.resize(num_classes);
    meta.resize(num_classes);
    parallel_for(num_classes, cfg.worker_width, [&](std::size_t i) {
      const ClassRecord& cls = manifest.classes[i];
      auto cap = static_cast<std::size_t>(cfg.per_class_cap);
      DescriptionList captioned = caption_existing(cls, client, ecfg, cap, sink);
      ExpansionState st = init_expansion(cls, std::move(captioned), quotas[i], ecfg);
      st = run_expansion(std::move(st), client, ecfg, sink);
      ExpansionMeta m;
      m.class_id = cls.class_id;
      m.status = std::string(expansion_status_name(st.status));
      m.expand_rounds = st.expand_rounds;
      m.dedup_rounds = st.dedup_rounds;
      m.captioned = static_cast<int>(st.captioned_count);
      m.list_size = static_cast<int>(st.list.size());
      meta[i] = std::move(m);
      lists[i] = std::move(st.list);
    });
    write_file_atomic(out / "stage/descriptions.tsv", descriptions_text(lists));
    journal.seal_stage("descriptions", hash_file(out / "stage/descriptions.tsv"));
    write_file_atomic(out / "stage/expansion_state.tsv", expansion_meta_text(meta));
    journal.seal_stage("expansion_state", hash_file(out / "stage/expansion_state.tsv"));
  }

  // ---- class anchor templates
  std::map<int, ClassFeatureTemplate> anchors;
  if (artifact_ok(journal, out, "templates", "stage/templates.tsv")) {
    anchors = load_templates(out / "stage/templates.tsv", manifest);
  } else {
    std::vector<ClassFeatureTemplate> flat(num_classes);
    parallel_for(num_classes, cfg.worker_width, [&](std::size_t i) {
      flat[i] = build_class_feature_template(lists[i], static_cast<int>(i),
                                             manifest.classes[i].label, client, ecfg, sink);
    });
    write_file_atomic(out / "stage/templates.tsv", templates_text(flat));
    journal.seal_stage("templates", hash_file(out / "stage/templates.tsv"));
    for (auto& t : flat) anchors[t.class_id] = std::move(t);
  }

  // ---- text-to-image generation over synthesized descriptions
  ImageStore store(out);
  std::vector<GeneratedImage> generated;
  if (artifact_ok(journal, out, "generated", "stage/generated.tsv")) {
    generated = load_generated(out / "stage/generated.tsv", manifest);
  } else {
    struct GenTask {
      int class_id;
      int item_index;
      const Description* desc;
    };
    std::vector<GenTask> tasks;
    for (const auto& list : lists) {
      int j = 0;
      for (const auto& d : list.items) {
        if (d.origin != DescriptionOrigin::Expanded) continue;
        tasks.push_back({list.class_id, j++, &d});
      }
    }
    generated.resize(tasks.size());
    parallel_for(tasks.size(), cfg.worker_width, [&](std::size_t k) {
      const GenTask& t = tasks[k];
      GeneratedImage g;
      g.image_id = make_image_id(t.class_id, t.item_index);
      g.class_id = t.class_id;
      g.description = *t.desc;
      std::uint64_t seed = derive_seed(cfg.seed, "t2i", static_cast<std::uint64_t>(t.class_id),
                                       static_cast<std::uint64_t>(t.item_index));
      ImageBuffer buffer = client.generate_image(t.desc->raw_text, seed);
      g.buffer_ref = store.save(g.image_id, 1, buffer);
      g.cycle = 1;
      g.status = ImageStatus::Pending;
      generated[k] = std::move(g);
    });
    write_file_atomic(out / "stage/generated.tsv", generated_text(generated));
    journal.seal_stage("generated", hash_file(out / "stage/generated.tsv"));
  }

  // ---- quality gate with iterative refinement
  std::vector<GeneratedImage> finals;
  if (artifact_ok(journal, out, "images", "stage/images.tsv") &&
      artifact_ok(journal, out, "eval_journal", "stage/eval_journal.tsv") &&
      artifact_ok(journal, out, "accepted_pool", "stage/accepted_pool.tsv")) {
    finals = load_images(out / "stage/images.tsv", manifest);
  } else {
    EvalConfig evc;
    evc.score_threshold = cfg.score_threshold;
    evc.max_cycles = cfg.max_cycles;
    evc.run_seed = cfg.seed;
    EvalBatchResult batch = run_eval_batch(std::move(generated), anchors, manifest, client,
                                           evc, store, cfg.worker_width, sink);
    finals = std::move(batch.images);
    for (const auto& g : finals) {
      journal.append("eval", "image:" + g.image_id, std::string(image_status_name(g.status)));
    }
    write_file_atomic(out / "stage/images.tsv", images_text(finals));
    journal.seal_stage("images", hash_file(out / "stage/images.tsv"));
    write_file_atomic(out / "stage/eval_journal.tsv", eval_journal_text(batch.records));
    journal.seal_stage("eval_journal", hash_file(out / "stage/eval_journal.tsv"));
    write_file_atomic(out / "stage/accepted_pool.tsv", accepted_pool_text(finals));
    journal.seal_stage("accepted_pool", hash_file(out / "stage/accepted_pool.tsv"));
  }

  // ---- mixed-sample emission
  int mixed = 0;
  if (cfg.num_mix_samples > 0) {
    if (artifact_ok(journal, out, "mix", "mix/labels.tsv")) {
      mixed = count_rows(out / "mix/labels.tsv");
    } else {
      GeneratedPool pool = pool_from_accepted(finals);
      MixConfig mcfg;
      mcfg.num_samples = cfg.num_mix_samples;
      mcfg.alpha = cfg.mix_alpha;
      mcfg.resolution = cfg.resolution;
      mcfg.seed = cfg.seed;
      ImageProvider originals;
      if (cfg.original_source == "procedural") {
        originals = [seed = cfg.seed, res = cfg.resolution](const std::string& ref) {
          return procedural_image(ref, seed, res);
        };
      } else {
        originals = [](const std::string& ref) { return read_ppm(ref); };
      }
      ImageProvider generated_images = [&store](const std::string& ref) {
        return store.load(ref);
      };
      fs::create_directories(out / "mix");
      std::ostringstream labels;
      emit_batches(manifest, pool, mcfg, originals, generated_images,
                   [&](const MixedSample& s) {
                     write_ppm((out / "mix" / (s.sample_id + ".ppm")).string(), s.pixels);
                     labels << format_mix_label_row(s) << '\n';
                     ++mixed;
                   });
      write_file_atomic(out / "mix/labels.tsv", labels.str());
      journal.seal_stage("mix", hash_file(out / "mix/labels.tsv"));
    }
  }

  // ---- summary
  RunSummary summary;
  summary.out_dir = out;
  summary.mixed_emitted = mixed;
  summary.classes.resize(num_classes);
  for (std::size_t i = 0; i < num_classes; ++i) {
    ClassSummary& cs = summary.classes[i];
    cs.class_id = static_cast<int>(i);
    cs.label = manifest.classes[i].label;
    cs.original = manifest.classes[i].original_count();
    for (const auto& d : lists[i].items) {
      if (d.origin == DescriptionOrigin::Captioned) {
        ++cs.captioned;
      } else {
        ++cs.expanded_kept;
      }
    }
    cs.status = meta[i].status;
    if (cs.status == "stalled") summary.stalled_classes.push_back(cs.class_id);
  }
  for (const auto& g : finals) {
    ClassSummary& cs = summary.classes[static_cast<std::size_t>(g.class_id)];
    ++cs.generated;
    if (g.status == ImageStatus::Accepted) {
      ++cs.accepted;
      ++summary.total_accepted;
    } else {
      ++cs.rejected;
      ++summary.total_rejected;
    }
  }
  summary.tallies = stack.stats->snapshot();

  write_file_atomic(out / "summary.txt", summary.to_text());
  journal.seal_stage("run", hash_file(out / "summary.txt"));
  return summary;
}

}  // namespace

std::string hash_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open for hashing: " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    h = fnv1a_bytes(buf, static_cast<std::size_t>(in.gcount()), h);
  }
  return to_hex16(h);
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open for write: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw ValidationError("short write: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string RunSummary::to_text() const {
  std::ostringstream os;
  os << "classes\t" << classes.size() << '\n';
  os << "class_id\tlabel\toriginal\tcaptioned\texpanded\tgenerated\taccepted\trejected\tstatus\n";
  for (const auto& c : classes) {
    os << c.class_id << '\t' << c.label << '\t' << c.original << '\t' << c.captioned << '\t'
       << c.expanded_kept << '\t' << c.generated << '\t' << c.accepted << '\t' << c.rejected
       << '\t' << c.status << '\n';
  }
  os << "stalled\t";
  if (stalled_classes.empty()) {
    os << "none";
  } else {
    for (std::size_t i = 0; i < stalled_classes.size(); ++i) {
      if (i) os << ',';
      os << stalled_classes[i];
    }
  }
  os << '\n';
  os << "accepted_total\t" << total_accepted << '\n';
  os << "rejected_total\t" << total_rejected << '\n';
  os << "mixed_emitted\t" << mixed_emitted << '\n';
  return os.str();
}

RunSummary run_pipeline(const PipelineConfig& config, const std::string& manifest_path,
                        const fs::path& out_dir, const PipelineHooks& hooks) {
  return run_impl(config, manifest_path, out_dir, hooks);
}

RunSummary resume_run(const fs::path& out_dir, const PipelineHooks& hooks) {
  fs::path cfg_path = out_dir / kConfigFile;
  if (!fs::exists(cfg_path)) {
    throw ValidationError("nothing to resume: " + cfg_path.string() + " not found");
  }
  PipelineConfig cfg = load_config(cfg_path.string());
  return run_impl(cfg, std::nullopt, out_dir, hooks);
}

RunSummary emit_mix_only(const fs::path& out_dir, int num_samples, std::uint64_t seed) {
  if (num_samples < 1) throw ValidationError("emit-mix needs num_samples >= 1");
  fs::path cfg_path = out_dir / kConfigFile;
  if (!fs::exists(cfg_path)) {
    throw ValidationError("no run found at " + out_dir.string());
  }
  PipelineConfig cfg = load_config(cfg_path.string());
  ClockPtr clock = cfg.simulated_clock
                       ? ClockPtr(std::make_shared<SimulatedClock>())
                       : ClockPtr(std::make_shared<SystemClock>());
  RunJournal journal = RunJournal::open(out_dir / kJournalFile, clock);

  if (!artifact_ok(journal, out_dir, "manifest", "stage/manifest.tsv") ||
      !artifact_ok(journal, out_dir, "images", "stage/images.tsv")) {
    throw ValidationError("run at " + out_dir.string() +
                          " has no sealed accepted pool; finish the run first");
  }
  DatasetManifest manifest = load_manifest((out_dir / "stage/manifest.tsv").string());
  std::vector<GeneratedImage> finals = load_images(out_dir / "stage/images.tsv", manifest);
  GeneratedPool pool = pool_from_accepted(finals);

  ImageStore store(out_dir);
  MixConfig mcfg;
  mcfg.num_samples = num_samples;
  mcfg.alpha = cfg.mix_alpha;
  mcfg.resolution = cfg.resolution;
  mcfg.seed = seed;
  ImageProvider originals;
  if (cfg.original_source == "procedural") {
    originals = [s = cfg.seed, res = cfg.resolution](const std::string& ref) {
      return procedural_image(ref, s, res);
    };
  } else {
    originals = [](const std::string& ref) { return read_ppm(ref); };
  }
  ImageProvider generated_images = [&store](const std::string& ref) {
    return store.load(ref);
  };

  fs::create_directories(out_dir / "mix");
  journal.append("mix", "-", "emit_requested");
  std::ostringstream labels;
  int mixed = 0;
  emit_batches(manifest, pool, mcfg, originals, generated_images, [&](const MixedSample& s) {
    write_ppm((out_dir / "mix" / (s.sample_id + ".ppm")).string(), s.pixels);
    labels << format_mix_label_row(s) << '\n';
    ++mixed;
  });
  write_file_atomic(out_dir / "mix/labels.tsv", labels.str());
  journal.seal_stage("mix", hash_file(out_dir / "mix/labels.tsv"));

  RunSummary summary;
  summary.out_dir = out_dir;
  summary.mixed_emitted = mixed;
  for (const auto& g : finals) {
    if (g.status == ImageStatus::Accepted) {
      ++summary.total_accepted;
    } else {
      ++summary.total_rejected;
    }
  }
  return summary;
}

}  // namespace tailgen
