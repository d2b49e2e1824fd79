#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tailgen {

enum class DescriptionOrigin { Captioned, Expanded, Refined };

std::string_view origin_name(DescriptionOrigin origin);
DescriptionOrigin origin_from_name(std::string_view name);

/// A structured class description. raw_text always equals the canonical
/// sentence re-rendered from (label, features, scene), so two descriptions
/// compare equal iff their normalized raw_text matches.
struct Description {
  int class_id = -1;
  std::vector<std::string> features;
  std::string scene;  // empty for summary-template derived text
  std::string raw_text;
  DescriptionOrigin origin = DescriptionOrigin::Captioned;
  int revision = 0;  // 0 for originals, +1 per refinement

  bool operator==(const Description& o) const {
    return class_id == o.class_id && features == o.features && scene == o.scene &&
           raw_text == o.raw_text && origin == o.origin && revision == o.revision;
  }
};

struct DescriptionList {
  int class_id = -1;
  std::vector<Description> items;

  std::size_t size() const { return items.size(); }
};

/// Summary sentence holding a class's most distinctive features; used as
/// the text anchor when scoring generated images. Never carries a scene.
struct ClassFeatureTemplate {
  int class_id = -1;
  std::vector<std::string> features;  // empty only for the bare fallback
  std::string rendered;
};

// --- sentence templates -----------------------------------------------------

/// `A photo of the class [<label>], with <f1, f2, ...> in <scene>.`
/// For lossless parse round-trips, features must not contain commas and the
/// scene must not contain " in ".
std::string render_template1(const std::string& label, const std::vector<std::string>& features,
                             const std::string& scene);

/// `A photo of the class [<label>] with <f1, f2, ...>.`
std::string render_template2(const std::string& label, const std::vector<std::string>& features);

/// Parse a description sentence. Tolerates arbitrary internal whitespace and
/// a missing final period; anything else is a ParseError. The returned
/// Description holds the canonical re-rendered sentence and no class_id.
Description parse_template1(const std::string& text, const std::string& expected_label);

ClassFeatureTemplate parse_template2(const std::string& text, const std::string& expected_label);

// --- prompts -----------------------------------------------------------------

enum class PromptKind {
  DescribeImage,      // caption one existing image
  ExtendList,         // ask for novel descriptions beyond the current list
  RemoveRepeats,      // ask to drop repetitive entries from the list
  SummarizeFeatures,  // build the class feature summary
  RefineDescription,  // improve a description that scored poorly
};

struct PromptContext {
  std::string label;
  const DescriptionList* list = nullptr;  // ExtendList / RemoveRepeats
  int batch_count = 0;                    // ExtendList
  const Description* target = nullptr;    // RefineDescription
};

/// Render a prompt. Pure: identical context yields identical bytes.
std::string render_prompt(PromptKind kind, const PromptContext& ctx);

/// The raw prompt template with its `{placeholder}` slots, as shipped in
/// the prompts/ directory.
std::string_view prompt_template(PromptKind kind);
std::string_view prompt_file_name(PromptKind kind);

// --- normalization -----------------------------------------------------------

/// Dedup key: lowercase, collapse whitespace, strip trailing punctuation.
/// Idempotent.
std::string normalize_text(std::string_view text);

}  // namespace tailgen
