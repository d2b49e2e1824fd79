#include "tailgen/mock_backend.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "tailgen/errors.hpp"
#include "tailgen/hashing.hpp"
#include "tailgen/templates.hpp"

namespace tailgen {

namespace {

// Caption vocabulary; deliberately disjoint from the expansion vocabulary so
// captioned and synthesized descriptions never collide textually.
constexpr std::string_view kCapAdj[] = {
    "slender", "plump",  "speckled", "glossy", "pale",       "banded",
    "crested", "mottled", "striped", "dusky",  "iridescent", "ragged",
};
constexpr std::string_view kCapPart[] = {
    "wings", "crown", "tail", "flanks", "bill",
    "throat", "back", "legs", "breast", "eye ring",
};
constexpr std::string_view kCapScene[] = {
    "a sunlit clearing", "a mossy trunk",    "a gravel riverbank", "a foggy ridge",
    "a reed bed",        "a garden hedge",   "an old fence post",  "a shaded canopy",
};

constexpr std::string_view kExpAdj[] = {
    "vivid",  "faded",  "angular", "curved", "bristled", "smooth",
    "forked", "ridged", "spotted", "broad",  "narrow",   "tufted",
    "barred", "sleek",  "matte",   "frosted", "amber",   "charcoal",
};
constexpr std::string_view kExpPart[] = {
    "plumage",    "markings", "crest",   "underside", "profile", "silhouette",
    "posture",    "outline",  "texture", "pattern",   "coloring", "sheen",
    "fringe",     "banding",  "contour", "shading",
};
constexpr std::string_view kExpScene[] = {
    "a misty wetland",         "a rocky outcrop",    "a flowering meadow",
    "a birch grove",           "a coastal dune",     "a frozen pond",
    "a canyon wall",           "a cypress swamp",    "a lantern-lit courtyard",
    "a terraced hillside",     "a desert wash",      "an alpine scree field",
    "a tidal flat",            "a bamboo thicket",
};

constexpr std::string_view kRefineMarker = "refinement detail";

// Generated buffers open with a fixed channel-value signature followed by the
// class key, refinement revision, and description hash, one byte per channel.
constexpr int kMagic[4] = {84, 71, 73, 77};  // 'T' 'G' 'I' 'M'
constexpr int kHeaderChannels = 4 + 8 + 2 + 8;

double unit_double(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

std::string extract_bracket_label(const std::string& text) {
  auto open = text.find('[');
  if (open == std::string::npos) return {};
  auto close = text.find(']', open + 1);
  if (close == std::string::npos) return {};
  return text.substr(open + 1, close - open - 1);
}

std::string prompt_label(const std::string& prompt) {
  constexpr std::string_view anchor = "the class [";
  auto pos = prompt.find(anchor);
  if (pos == std::string::npos) return extract_bracket_label(prompt);
  auto start = pos + anchor.size();
  auto close = prompt.find(']', start);
  if (close == std::string::npos) return {};
  return prompt.substr(start, close - start);
}

// Description lines embedded in a list prompt all start with the Template-1
// prefix at column zero (the trailing grammar reminder line does not).
std::vector<std::string> embedded_list_lines(const std::string& prompt) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= prompt.size()) {
    auto end = prompt.find('\n', start);
    std::string line = prompt.substr(
        start, end == std::string::npos ? std::string::npos : end - start);
    if (line.rfind("A photo of ", 0) == 0) lines.push_back(line);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return lines;
}

int parse_request_count(const std::string& prompt) {
  constexpr std::string_view anchor = "providing up to ";
  auto pos = prompt.find(anchor);
  if (pos == std::string::npos) return 0;
  std::size_t i = pos + anchor.size();
  int value = 0;
  bool any = false;
  while (i < prompt.size() && prompt[i] >= '0' && prompt[i] <= '9') {
    value = value * 10 + (prompt[i] - '0');
    ++i;
    any = true;
  }
  return any ? value : 0;
}

int count_refine_markers(const std::string& text) {
  int n = 0;
  std::size_t pos = 0;
  while ((pos = text.find(kRefineMarker, pos)) != std::string::npos) {
    ++n;
    pos += kRefineMarker.size();
  }
  return n;
}

void put_byte(ImageBuffer& img, int channel, int value) {
  img.data[static_cast<std::size_t>(channel)] = static_cast<double>(value & 0xff);
}

int get_byte(const ImageBuffer& img, int channel) {
  return static_cast<int>(std::llround(img.data[static_cast<std::size_t>(channel)])) & 0xff;
}

}  // namespace

void MockBackendConfig::validate() const {
  if (duplicate_rate < 0.0 || duplicate_rate > 1.0) {
    throw ValidationError("mock duplicate_rate must be in [0, 1]");
  }
  if (embed_dim < 2) throw ValidationError("mock embed_dim must be >= 2");
  if (image_size < 4) throw ValidationError("mock image_size must be >= 4");
  if (!std::isfinite(embed_base) || !std::isfinite(embed_gain)) {
    throw ValidationError("mock embed parameters must be finite");
  }
}

MockBackend::MockBackend(MockBackendConfig config) : config_(config) {
  config_.validate();
}

BackendResponse MockBackend::invoke(const BackendRequest& request) {
  BackendResponse resp;
  switch (request.kind) {
    case RequestKind::Caption:
      resp.text = caption(request);
      break;
    case RequestKind::Expand:
      if (request.prompt.find("Please exclude any repetitive") != std::string::npos) {
        resp.lines = dedup(request);
      } else {
        resp.lines = expand(request);
      }
      break;
    case RequestKind::Summarize:
      resp.text = summarize(request);
      break;
    case RequestKind::Refine:
      resp.text = refine(request);
      break;
    case RequestKind::GenerateImage:
      resp.image = generate(request);
      break;
    case RequestKind::EmbedImage:
      resp.vector = embed_image(request);
      break;
    case RequestKind::EmbedText:
      resp.vector = embed_text(request);
      break;
  }
  return resp;
}

std::string MockBackend::caption(const BackendRequest& request) const {
  std::string label = prompt_label(request.prompt);
  if (label.empty()) throw BackendError("caption prompt names no class", false);
  std::uint64_t h =
      derive_seed(config_.seed, "caption", fnv1a(request.image_ref), request.seed);
  std::string f1 = std::string(kCapAdj[h % 12]) + " " + std::string(kCapPart[(h / 12) % 10]);
  std::uint64_t h2 = mix64(h);
  std::string f2 = std::string(kCapAdj[h2 % 12]) + " " + std::string(kCapPart[(h2 / 12) % 10]);
  std::vector<std::string> features{f1};
  if (f2 != f1) features.push_back(f2);
  std::string scene{kCapScene[(h / 120) % 8]};
  return render_template1(label, features, scene);
}

std::string mock_novel_description(const std::string& label, int index) {
  int wrap = index / (18 * 16 * 14);
  int base = index % (18 * 16 * 14);
  std::string feature = std::string(kExpAdj[base % 18]) + " " +
                        std::string(kExpPart[(base / 18) % 16]);
  if (wrap > 0) feature += " mark " + std::to_string(wrap);
  std::string scene{kExpScene[(base / (18 * 16)) % 14]};
  return render_template1(label, {feature}, scene);
}

std::vector<std::string> MockBackend::expand(const BackendRequest& request) const {
  std::string label = prompt_label(request.prompt);
  if (label.empty()) throw BackendError("expansion prompt names no class", false);
  int count = parse_request_count(request.prompt);
  if (count <= 0) throw BackendError("expansion prompt requests no items", false);

  std::vector<std::string> pool = embedded_list_lines(request.prompt);
  std::unordered_set<std::string> known;
  for (const auto& line : pool) known.insert(normalize_text(line));

  std::uint64_t label_key = fnv1a(normalize_text(label));
  std::uint64_t draw_seed = derive_seed(config_.seed ^ request.seed, "dup", label_key,
                                        static_cast<std::uint64_t>(pool.size()));
  std::vector<std::string> out;
  int novel_index = 0;
  for (int slot = 0; slot < count; ++slot) {
    double u = unit_double(mix64(draw_seed + static_cast<std::uint64_t>(slot)));
    if (!pool.empty() && u < config_.duplicate_rate) {
      std::uint64_t pick =
          mix64(draw_seed ^ (0x5851f42d4c957f2dull + static_cast<std::uint64_t>(slot)));
      out.push_back(pool[pick % pool.size()]);
      continue;
    }
    std::string line;
    for (;;) {
      line = mock_novel_description(label, novel_index++);
      if (!known.count(normalize_text(line))) break;
    }
    known.insert(normalize_text(line));
    pool.push_back(line);
    out.push_back(line);
  }
  return out;
}

std::vector<std::string> MockBackend::dedup(const BackendRequest& request) const {
  std::vector<std::string> lines = embedded_list_lines(request.prompt);
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (auto& line : lines) {
    if (seen.insert(normalize_text(line)).second) out.push_back(std::move(line));
  }
  return out;
}

std::string MockBackend::summarize(const BackendRequest& request) const {
  std::string label = prompt_label(request.prompt);
  if (label.empty()) throw BackendError("summary prompt names no class", false);
  std::uint64_t h = derive_seed(config_.seed, "summary", fnv1a(normalize_text(label)), 0);
  std::string f1 = std::string(kExpAdj[h % 18]) + " " + std::string(kExpPart[(h / 18) % 16]);
  std::uint64_t h2 = mix64(h);
  std::string f2 = std::string(kExpAdj[h2 % 18]) + " " + std::string(kExpPart[(h2 / 18) % 16]);
  if (f2 == f1) {
    f2 = std::string(kExpAdj[(h2 + 1) % 18]) + " " + std::string(kExpPart[(h2 / 18 + 1) % 16]);
  }
  return render_template2(label, {f1, f2});
}

std::string MockBackend::refine(const BackendRequest& request) const {
  std::string label = prompt_label(request.prompt);
  auto open = request.prompt.find('"');
  auto close = open == std::string::npos ? std::string::npos
                                         : request.prompt.find('"', open + 1);
  if (label.empty() || close == std::string::npos) {
    throw BackendError("refine prompt carries no quoted description", false);
  }
  std::string desc = request.prompt.substr(open + 1, close - open - 1);
  Description parsed = parse_template1(desc, label);
  int next = count_refine_markers(desc) + 1;
  auto features = parsed.features;
  features.push_back(std::string(kRefineMarker) + " " + std::to_string(next));
  return render_template1(label, features, parsed.scene);
}

ImageBuffer MockBackend::generate(const BackendRequest& request) const {
  const std::string& desc = request.prompt;
  if (desc.empty()) throw BackendError("image generation needs a description", false);
  std::string label = extract_bracket_label(desc);
  std::uint64_t class_key = fnv1a(normalize_text(label));
  std::uint64_t desc_hash = fnv1a(normalize_text(desc));
  int revision = count_refine_markers(desc);

  ImageBuffer img;
  img.width = config_.image_size;
  img.height = config_.image_size;
  img.data.assign(static_cast<std::size_t>(img.width) * img.height * 3, 0.0);

  int ch = 0;
  for (int m : kMagic) put_byte(img, ch++, m);
  for (int i = 0; i < 8; ++i) put_byte(img, ch++, static_cast<int>(class_key >> (8 * i)));
  put_byte(img, ch++, revision & 0xff);
  put_byte(img, ch++, (revision >> 8) & 0xff);
  for (int i = 0; i < 8; ++i) put_byte(img, ch++, static_cast<int>(desc_hash >> (8 * i)));

  XorShift64 rng(derive_seed(config_.seed, "t2i", desc_hash, request.seed));
  for (std::size_t i = kHeaderChannels; i < img.data.size(); ++i) {
    img.data[i] = static_cast<double>(rng.next() & 0xff);
  }
  return img;
}

Embedding MockBackend::embed_image(const BackendRequest& request) const {
  ImageBuffer img = decode_ppm(request.image_bytes);
  Embedding e;
  e.values.assign(static_cast<std::size_t>(config_.embed_dim), 0.0);

  bool tagged = img.data.size() >= kHeaderChannels;
  for (int i = 0; tagged && i < 4; ++i) tagged = get_byte(img, i) == kMagic[i];
  if (!tagged) {
    // Foreign buffer: a stable unit vector off in its own direction.
    auto bytes = encode_ppm(img);
    std::uint64_t key = fnv1a_bytes(bytes.data(), bytes.size());
    e.values[key % static_cast<std::uint64_t>(config_.embed_dim)] = 1.0;
    return e;
  }

  std::uint64_t class_key = 0;
  for (int i = 0; i < 8; ++i) {
    class_key |= static_cast<std::uint64_t>(get_byte(img, 4 + i)) << (8 * i);
  }
  int revision = get_byte(img, 12) | (get_byte(img, 13) << 8);
  std::uint64_t desc_hash = 0;
  for (int i = 0; i < 8; ++i) {
    desc_hash |= static_cast<std::uint64_t>(get_byte(img, 14 + i)) << (8 * i);
  }

  auto dim = static_cast<std::uint64_t>(config_.embed_dim);
  std::uint64_t u_idx = class_key % dim;
  std::uint64_t w_idx = (u_idx + 1 + desc_hash % (dim - 1)) % dim;
  double c = std::clamp(config_.embed_base + config_.embed_gain * revision, -1.0, 1.0);
  double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  e.values[u_idx] = c;
  e.values[w_idx] += s;
  return e;
}

Embedding MockBackend::embed_text(const BackendRequest& request) const {
  if (request.text.empty()) throw BackendError("cannot embed empty text", false);
  std::string label = extract_bracket_label(request.text);
  std::uint64_t key =
      label.empty() ? fnv1a(normalize_text(request.text)) : fnv1a(normalize_text(label));
  Embedding e;
  e.values.assign(static_cast<std::size_t>(config_.embed_dim), 0.0);
  e.values[key % static_cast<std::uint64_t>(config_.embed_dim)] = 1.0;
  return e;
}

ImageBuffer procedural_image(std::string_view ref, std::uint64_t seed, int size) {
  if (size < 1) throw ValidationError("image size must be >= 1");
  ImageBuffer img;
  img.width = size;
  img.height = size;
  img.data.resize(static_cast<std::size_t>(size) * size * 3);
  XorShift64 rng(derive_seed(seed, "source", fnv1a(ref), 0));
  for (auto& v : img.data) v = static_cast<double>(rng.next() & 0xff);
  return img;
}

}  // namespace tailgen
