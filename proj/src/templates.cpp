#include "tailgen/templates.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "tailgen/errors.hpp"

namespace tailgen {

namespace {

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_ws = true;  // also trims leading whitespace
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!in_ws) out.push_back(' ');
      in_ws = true;
    } else {
      out.push_back(c);
      in_ws = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  }
  return true;
}

std::vector<std::string> split_features(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t p = s.find(',', start);
    std::string piece = trim(p == std::string::npos ? s.substr(start) : s.substr(start, p - start));
    if (!piece.empty()) out.push_back(std::move(piece));
    if (p == std::string::npos) break;
    start = p + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

constexpr std::string_view kPrefix = "A photo of the class [";

// Shared head parse: returns (label, remainder-after-"with").
std::pair<std::string, std::string> parse_head(const std::string& raw) {
  std::string text = collapse_whitespace(raw);
  if (text.compare(0, kPrefix.size(), kPrefix) != 0) {
    throw ParseError("text does not start with the class template prefix", raw);
  }
  std::size_t close = text.find(']', kPrefix.size());
  if (close == std::string::npos) throw ParseError("unterminated class label", raw);
  std::string label = trim(text.substr(kPrefix.size(), close - kPrefix.size()));
  if (label.empty()) throw ParseError("empty class label", raw);

  std::size_t pos = close + 1;
  while (pos < text.size() && (text[pos] == ' ' || text[pos] == ',')) ++pos;
  if (text.compare(pos, 4, "with") != 0) throw ParseError("missing 'with' clause", raw);
  pos += 4;
  if (pos < text.size() && text[pos] == ' ') ++pos;
  return {label, text.substr(pos)};
}

void check_label(const std::string& got, const std::string& expected, const std::string& raw) {
  if (!iequals(collapse_whitespace(got), collapse_whitespace(expected))) {
    throw ParseError("label mismatch: expected '" + expected + "', got '" + got + "'", raw);
  }
}

std::string strip_final_period(std::string s) {
  if (!s.empty() && s.back() == '.') s.pop_back();
  return trim(s);
}

struct PlaceholderValue {
  std::string_view name;
  std::string value;
};

std::string substitute(std::string_view tmpl, const std::vector<PlaceholderValue>& values) {
  std::string out(tmpl);
  for (const auto& pv : values) {
    std::string token = "{" + std::string(pv.name) + "}";
    std::size_t pos = 0;
    while ((pos = out.find(token, pos)) != std::string::npos) {
      out.replace(pos, token.size(), pv.value);
      pos += pv.value.size();
    }
  }
  return out;
}

std::string render_list(const DescriptionList& list) {
  if (list.items.empty()) return "(none yet)";
  std::string out;
  for (std::size_t i = 0; i < list.items.size(); ++i) {
    if (i) out += '\n';
    out += list.items[i].raw_text;
  }
  return out;
}

// Prompt templates. The `{label}`, `{descriptions}`, `{count}` and
// `{description}` slots are substituted; the quoted sentence templates keep
// their literal braces. These strings are mirrored byte for byte by the
// files under prompts/.
constexpr std::string_view kDescribeImage =
    "Please use the Template 1 to briefly describe the image of the class [{label}].\n"
    "Template 1: \"A photo of the class [{label}], with {distinctive features} in {specific "
    "scenes}.\"\n";

constexpr std::string_view kExtendList =
    "Here is the existing descriptions list for the class [{label}]:\n"
    "{descriptions}\n"
    "Besides these descriptions mentioned above, please use the Template 1 to list other "
    "possible distinctive features and specific scenes for the class [{label}], providing up "
    "to {count} new descriptions, one per line.\n"
    "Template 1: \"A photo of the class [{label}], with {distinctive features} in {specific "
    "scenes}.\"\n";

constexpr std::string_view kRemoveRepeats =
    "Here is the descriptions list for the class [{label}]:\n"
    "{descriptions}\n"
    "Please exclude any repetitive distinctive features and specific scenes for class "
    "[{label}] in this descriptions list. Return the remaining descriptions, one per line.\n";

constexpr std::string_view kSummarizeFeatures =
    "Please use Template 2 to summarize the most distinctive features of class [{label}].\n"
    "Template 2: \"A photo of the class [{label}] with {feature 1}, {feature 2}, ...\"\n";

constexpr std::string_view kRefineDescription =
    "This description \"{description}\" doesn't seem to be representative of the class "
    "[{label}]. Could you refine it to enhance the distinctive features of class [{label}]? "
    "Please answer with a single Template 1 sentence.\n"
    "Template 1: \"A photo of the class [{label}], with {distinctive features} in {specific "
    "scenes}.\"\n";

}  // namespace

std::string_view origin_name(DescriptionOrigin origin) {
  switch (origin) {
    case DescriptionOrigin::Captioned: return "captioned";
    case DescriptionOrigin::Expanded: return "expanded";
    case DescriptionOrigin::Refined: return "refined";
  }
  return "unknown";
}

DescriptionOrigin origin_from_name(std::string_view name) {
  if (name == "captioned") return DescriptionOrigin::Captioned;
  if (name == "expanded") return DescriptionOrigin::Expanded;
  if (name == "refined") return DescriptionOrigin::Refined;
  throw ValidationError("unknown description origin: " + std::string(name));
}

std::string render_template1(const std::string& label, const std::vector<std::string>& features,
                             const std::string& scene) {
  if (label.empty()) throw ValidationError("label must be nonempty");
  if (features.empty()) throw ValidationError("features must be nonempty");
  if (scene.empty()) throw ValidationError("scene must be nonempty");
  return "A photo of the class [" + label + "], with " + join(features, ", ") + " in " + scene +
         ".";
}

std::string render_template2(const std::string& label, const std::vector<std::string>& features) {
  if (label.empty()) throw ValidationError("label must be nonempty");
  if (features.empty()) throw ValidationError("features must be nonempty");
  return "A photo of the class [" + label + "] with " + join(features, ", ") + ".";
}

Description parse_template1(const std::string& text, const std::string& expected_label) {
  auto [label, body] = parse_head(text);
  check_label(label, expected_label, text);
  body = strip_final_period(body);

  // The scene is everything after the last " in "; features come before it.
  std::size_t sep = body.rfind(" in ");
  if (sep == std::string::npos) throw ParseError("missing scene clause", text);
  std::string features_part = body.substr(0, sep);
  std::string scene = trim(body.substr(sep + 4));
  if (scene.empty()) throw ParseError("empty scene", text);

  auto features = split_features(features_part);
  if (features.empty()) throw ParseError("no features found", text);

  Description desc;
  desc.features = std::move(features);
  desc.scene = std::move(scene);
  desc.raw_text = render_template1(label, desc.features, desc.scene);
  return desc;
}

ClassFeatureTemplate parse_template2(const std::string& text, const std::string& expected_label) {
  auto [label, body] = parse_head(text);
  check_label(label, expected_label, text);
  body = strip_final_period(body);

  if (body.find(" in ") != std::string::npos) {
    throw ParseError("scene clause present in feature summary", text);
  }
  auto features = split_features(body);
  if (features.empty()) throw ParseError("no features found", text);

  ClassFeatureTemplate tmpl;
  tmpl.features = std::move(features);
  tmpl.rendered = render_template2(label, tmpl.features);
  return tmpl;
}

std::string_view prompt_template(PromptKind kind) {
  switch (kind) {
    case PromptKind::DescribeImage: return kDescribeImage;
    case PromptKind::ExtendList: return kExtendList;
    case PromptKind::RemoveRepeats: return kRemoveRepeats;
    case PromptKind::SummarizeFeatures: return kSummarizeFeatures;
    case PromptKind::RefineDescription: return kRefineDescription;
  }
  throw ValidationError("unknown prompt kind");
}

std::string_view prompt_file_name(PromptKind kind) {
  switch (kind) {
    case PromptKind::DescribeImage: return "describe_image.txt";
    case PromptKind::ExtendList: return "extend_list.txt";
    case PromptKind::RemoveRepeats: return "remove_repeats.txt";
    case PromptKind::SummarizeFeatures: return "summarize_features.txt";
    case PromptKind::RefineDescription: return "refine_description.txt";
  }
  throw ValidationError("unknown prompt kind");
}

std::string render_prompt(PromptKind kind, const PromptContext& ctx) {
  if (ctx.label.empty()) throw ValidationError("prompt context requires a class label");
  std::vector<PlaceholderValue> values{{"label", ctx.label}};

  switch (kind) {
    case PromptKind::DescribeImage:
      break;
    case PromptKind::ExtendList:
      if (!ctx.list) throw ValidationError("ExtendList prompt requires the current list");
      if (ctx.batch_count < 1) throw ValidationError("ExtendList prompt requires a batch count");
      values.push_back({"descriptions", render_list(*ctx.list)});
      values.push_back({"count", std::to_string(ctx.batch_count)});
      break;
    case PromptKind::RemoveRepeats:
      if (!ctx.list) throw ValidationError("RemoveRepeats prompt requires the current list");
      values.push_back({"descriptions", render_list(*ctx.list)});
      break;
    case PromptKind::SummarizeFeatures:
      break;
    case PromptKind::RefineDescription:
      if (!ctx.target) throw ValidationError("RefineDescription prompt requires a description");
      values.push_back({"description", ctx.target->raw_text});
      break;
  }
  return substitute(prompt_template(kind), values);
}

std::string normalize_text(std::string_view text) {
  std::string out = collapse_whitespace(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const std::string_view punct = ".,;:!?";
  while (!out.empty() &&
         (punct.find(out.back()) != std::string_view::npos || out.back() == ' ')) {
    out.pop_back();
  }
  return out;
}

}  // namespace tailgen
