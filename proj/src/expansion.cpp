#include "tailgen/expansion.hpp"

#include <cmath>
#include <unordered_set>

#include "tailgen/errors.hpp"
#include "tailgen/hashing.hpp"

namespace tailgen {

namespace {

constexpr std::string_view kStatusNames[] = {"expanding", "dedup_pending", "complete",
                                             "stalled"};

std::uint64_t class_seed(const ExpansionConfig& cfg, std::string_view tag, int class_id,
                         std::uint64_t n) {
  return derive_seed(cfg.run_seed, tag, static_cast<std::uint64_t>(class_id), n);
}

}  // namespace

std::string_view expansion_status_name(ExpansionStatus status) {
  return kStatusNames[static_cast<std::size_t>(status)];
}

ExpansionStatus expansion_status_from_name(std::string_view name) {
  for (std::size_t i = 0; i < 4; ++i) {
    if (kStatusNames[i] == name) return static_cast<ExpansionStatus>(i);
  }
  throw ValidationError("unknown expansion status: " + std::string(name));
}

void emit_event(const EventSink& sink, std::string stage, int class_id,
                std::string outcome, std::string detail) {
  if (!sink) return;
  StageEvent ev;
  ev.stage = std::move(stage);
  ev.class_id = class_id;
  ev.outcome = std::move(outcome);
  ev.detail = std::move(detail);
  sink(ev);
}

DescriptionList caption_existing(const ClassRecord& cls, BackendClient& client,
                                 const ExpansionConfig& cfg, std::size_t max_items,
                                 const EventSink& events) {
  DescriptionList list;
  list.class_id = cls.class_id;
  PromptContext ctx;
  ctx.label = cls.label;
  const std::string prompt = render_prompt(PromptKind::DescribeImage, ctx);

  std::size_t n = std::min(max_items, cls.image_refs.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& ref = cls.image_refs[i];
    Description desc;
    bool ok = false;
    for (int attempt = 0; attempt < 2 && !ok; ++attempt) {
      std::uint64_t seed = class_seed(cfg, attempt == 0 ? "caption" : "caption.retry",
                                      cls.class_id, i);
      std::string text = client.caption(ref, prompt, seed);
      try {
        desc = parse_template1(text, cls.label);
        ok = true;
      } catch (const ParseError& e) {
        emit_event(events, "caption", cls.class_id, "parse_failure",
                   ref + ": " + e.what());
      }
    }
    if (!ok) {
      emit_event(events, "caption", cls.class_id, "skipped", ref);
      continue;
    }
    desc.class_id = cls.class_id;
    desc.origin = DescriptionOrigin::Captioned;
    desc.revision = 0;
    list.items.push_back(std::move(desc));
  }
  return list;
}

ExpansionState init_expansion(const ClassRecord& cls, DescriptionList captioned,
                              const GenerationQuota& quota, const ExpansionConfig& cfg) {
  if (cfg.per_class_cap < 1) throw ValidationError("per-class cap must be >= 1");
  if (cfg.batch_size < 1) throw ValidationError("expansion batch size must be >= 1");
  if (quota.class_id != cls.class_id) {
    throw ValidationError("quota/class mismatch for class " + std::to_string(cls.class_id));
  }

  ExpansionState state;
  state.class_id = cls.class_id;
  state.label = cls.label;
  state.list = std::move(captioned);
  state.list.class_id = cls.class_id;
  state.captioned_count = state.list.size();
  state.target_size = cfg.per_class_cap;
  state.quota = quota.target_new;
  if (state.quota > 0) {
    int batches = (state.quota + cfg.batch_size - 1) / cfg.batch_size;
    state.round_budget = 3 * batches;
    state.status = static_cast<int>(state.list.size()) >= state.target_size
                       ? ExpansionStatus::DedupPending
                       : ExpansionStatus::Expanding;
  } else {
    state.round_budget = 0;
    state.status = ExpansionStatus::Complete;
  }
  return state;
}

ExpansionState expand_class(ExpansionState state, BackendClient& client,
                            const ExpansionConfig& cfg, const EventSink& events) {
  if (state.status != ExpansionStatus::Expanding) {
    throw ValidationError("expand_class called on class " + std::to_string(state.class_id) +
                          " in status " + std::string(expansion_status_name(state.status)));
  }

  PromptContext ctx;
  ctx.label = state.label;
  ctx.list = &state.list;
  ctx.batch_count = cfg.batch_size;
  std::string prompt = render_prompt(PromptKind::ExtendList, ctx);
  std::uint64_t seed = class_seed(cfg, "expand", state.class_id,
                                  static_cast<std::uint64_t>(state.expand_rounds));
  std::vector<std::string> lines = client.expand(prompt, seed);
  ++state.expand_rounds;

  std::unordered_set<std::string> known;
  for (const auto& item : state.list.items) known.insert(normalize_text(item.raw_text));

  for (const auto& line : lines) {
    if (static_cast<int>(state.list.size()) >= state.target_size) break;
    Description desc;
    try {
      desc = parse_template1(line, state.label);
    } catch (const ParseError& e) {
      emit_event(events, "expand", state.class_id, "parse_failure",
                 std::string(e.what()));
      continue;
    }
    if (!known.insert(normalize_text(desc.raw_text)).second) continue;  // not novel
    desc.class_id = state.class_id;
    desc.origin = DescriptionOrigin::Expanded;
    desc.revision = 0;
    state.list.items.push_back(std::move(desc));
  }

  if (static_cast<int>(state.list.size()) >= state.target_size) {
    state.status = ExpansionStatus::DedupPending;
  } else if (state.calls_used() >= state.round_budget) {
    state.status = ExpansionStatus::Stalled;
    emit_event(events, "expand", state.class_id, "stalled",
               std::to_string(state.list.size()) + "/" + std::to_string(state.target_size));
  }
  return state;
}

ExpansionState dedup_class(ExpansionState state, BackendClient& client,
                           const ExpansionConfig& cfg, const EventSink& events) {
  if (state.status == ExpansionStatus::Complete) {
    throw ValidationError("dedup_class called on completed class " +
                          std::to_string(state.class_id));
  }

  PromptContext ctx;
  ctx.label = state.label;
  ctx.list = &state.list;
  std::string prompt = render_prompt(PromptKind::RemoveRepeats, ctx);
  std::uint64_t seed = class_seed(cfg, "dedup", state.class_id,
                                  static_cast<std::uint64_t>(state.dedup_rounds));
  std::vector<std::string> lines = client.expand(prompt, seed);
  ++state.dedup_rounds;

  std::unordered_set<std::string> kept;
  for (const auto& line : lines) kept.insert(normalize_text(line));

  // The reply may only drop entries. A reply introducing unknown lines or
  // losing a captioned original is rejected; local dedup still applies.
  std::unordered_set<std::string> present;
  for (const auto& item : state.list.items) present.insert(normalize_text(item.raw_text));
  bool reply_valid = true;
  for (const auto& key : kept) {
    if (!present.count(key)) { reply_valid = false; break; }
  }
  if (reply_valid) {
    for (const auto& item : state.list.items) {
      if (item.origin == DescriptionOrigin::Captioned &&
          !kept.count(normalize_text(item.raw_text))) {
        reply_valid = false;
        break;
      }
    }
  }
  if (!reply_valid) {
    emit_event(events, "dedup", state.class_id, "reply_rejected",
               "falling back to local duplicate removal");
  }

  std::vector<Description> survivors;
  survivors.reserve(state.list.items.size());
  std::unordered_set<std::string> seen;
  for (auto& item : state.list.items) {
    std::string key = normalize_text(item.raw_text);
    if (item.origin == DescriptionOrigin::Captioned) {
      seen.insert(key);
      survivors.push_back(std::move(item));
      continue;
    }
    if (seen.count(key)) continue;
    if (reply_valid && !kept.count(key)) continue;
    seen.insert(key);
    survivors.push_back(std::move(item));
  }
  state.list.items = std::move(survivors);

  if (static_cast<int>(state.list.size()) >= state.target_size) {
    state.status = ExpansionStatus::Complete;
  } else if (state.quota > 0 && state.calls_used() < state.round_budget) {
    state.status = ExpansionStatus::Expanding;
  } else {
    state.status = ExpansionStatus::Stalled;
    emit_event(events, "dedup", state.class_id, "stalled",
               std::to_string(state.list.size()) + "/" + std::to_string(state.target_size));
  }
  return state;
}

ExpansionState run_expansion(ExpansionState state, BackendClient& client,
                             const ExpansionConfig& cfg, const EventSink& events) {
  for (;;) {
    switch (state.status) {
      case ExpansionStatus::Expanding:
        // Keep one budgeted call in reserve so a stalling class still gets
        // its final repeat-removal pass without exceeding the call budget.
        if (state.calls_used() >= state.round_budget - 1) {
          state = dedup_class(std::move(state), client, cfg, events);
          if (state.status != ExpansionStatus::Complete) {
            state.status = ExpansionStatus::Stalled;
          }
          return state;
        }
        state = expand_class(std::move(state), client, cfg, events);
        break;
      case ExpansionStatus::DedupPending:
        state = dedup_class(std::move(state), client, cfg, events);
        break;
      case ExpansionStatus::Complete:
      case ExpansionStatus::Stalled:
        return state;
    }
  }
}

std::string bare_fallback_template(const std::string& label) {
  return "A photo of a [" + label + "].";
}

ClassFeatureTemplate build_class_feature_template(const DescriptionList& list, int class_id,
                                                  const std::string& label,
                                                  BackendClient& client,
                                                  const ExpansionConfig& cfg,
                                                  const EventSink& events) {
  ClassFeatureTemplate tmpl;
  tmpl.class_id = class_id;
  if (list.items.empty()) {
    emit_event(events, "template", class_id, "fallback", "empty description list");
    tmpl.rendered = bare_fallback_template(label);
    return tmpl;
  }

  PromptContext ctx;
  ctx.label = label;
  std::string prompt = render_prompt(PromptKind::SummarizeFeatures, ctx);
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::uint64_t seed = class_seed(cfg, "summarize", class_id,
                                    static_cast<std::uint64_t>(attempt));
    std::string text = client.summarize(prompt, seed);
    try {
      ClassFeatureTemplate parsed = parse_template2(text, label);
      parsed.class_id = class_id;
      return parsed;
    } catch (const ParseError& e) {
      emit_event(events, "template", class_id, "parse_failure", e.what());
    }
  }
  emit_event(events, "template", class_id, "fallback", "summary never parsed");
  tmpl.rendered = bare_fallback_template(label);
  return tmpl;
}

}  // namespace tailgen
