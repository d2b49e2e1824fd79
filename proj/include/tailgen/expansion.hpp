#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include "tailgen/backends.hpp"
#include "tailgen/dataset.hpp"
#include "tailgen/templates.hpp"

namespace tailgen {

enum class ExpansionStatus { Expanding, DedupPending, Complete, Stalled };

std::string_view expansion_status_name(ExpansionStatus status);
ExpansionStatus expansion_status_from_name(std::string_view name);

/// Per-class progress of the description-list growth loop. The list holds
/// captioned originals first, then kept synthesized entries, in insertion
/// order; captioned entries are never removed.
struct ExpansionState {
  int class_id = -1;
  std::string label;
  DescriptionList list;
  int target_size = 0;       // K_y
  int quota = 0;             // K_y - M_y, floored at 0
  int expand_rounds = 0;     // extension calls made
  int dedup_rounds = 0;      // repeat-removal calls made
  int round_budget = 0;      // combined call budget
  std::size_t captioned_count = 0;
  ExpansionStatus status = ExpansionStatus::Complete;

  int calls_used() const { return expand_rounds + dedup_rounds; }
};

struct ExpansionConfig {
  int per_class_cap = 0;  // K_y
  int batch_size = 10;    // descriptions requested per extension call
  std::uint64_t run_seed = 0;
};

/// Non-fatal event during description work; routed to the run journal.
struct StageEvent {
  std::string stage;
  int class_id = -1;
  std::string outcome;
  std::string detail;
};
using EventSink = std::function<void(const StageEvent&)>;

void emit_event(const EventSink& sink, std::string stage, int class_id,
                std::string outcome, std::string detail = {});

/// Caption up to `max_items` of the class's images (one re-ask per image on
/// an unparseable reply, then skip with an event). Duplicate captions are
/// retained: originals are never discarded.
DescriptionList caption_existing(const ClassRecord& cls, BackendClient& client,
                                 const ExpansionConfig& cfg, std::size_t max_items,
                                 const EventSink& events = {});

ExpansionState init_expansion(const ClassRecord& cls, DescriptionList captioned,
                              const GenerationQuota& quota, const ExpansionConfig& cfg);

/// One extension round: ask for batch_size candidates, append the parseable,
/// novel ones (normalized comparison) until the list reaches K_y.
ExpansionState expand_class(ExpansionState state, BackendClient& client,
                            const ExpansionConfig& cfg, const EventSink& events = {});

/// One repeat-removal round. The model's reply may only drop entries; a reply
/// that would lose a captioned original is rejected and local normalized
/// dedup is applied instead. A list left short of K_y returns to Expanding
/// while call budget remains.
ExpansionState dedup_class(ExpansionState state, BackendClient& client,
                           const ExpansionConfig& cfg, const EventSink& events = {});

/// Drive a class to a terminal status (Complete or Stalled).
ExpansionState run_expansion(ExpansionState state, BackendClient& client,
                             const ExpansionConfig& cfg, const EventSink& events = {});

/// Summarize the class's distinctive features into the scoring anchor
/// sentence (one re-ask on parse failure, then the bare fallback
/// "A photo of a [<label>]." with an event).
ClassFeatureTemplate build_class_feature_template(const DescriptionList& list, int class_id,
                                                  const std::string& label,
                                                  BackendClient& client,
                                                  const ExpansionConfig& cfg,
                                                  const EventSink& events = {});

/// The bare anchor used when no summary can be produced.
std::string bare_fallback_template(const std::string& label);

}  // namespace tailgen
