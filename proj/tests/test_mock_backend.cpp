#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unordered_set>

#include "tailgen/backends.hpp"
#include "tailgen/errors.hpp"
#include "tailgen/mock_backend.hpp"
#include "tailgen/templates.hpp"

using namespace tailgen;

namespace {

BackendClient make_client(MockBackendConfig config = {}) {
  return BackendClient(std::make_shared<MockBackend>(config));
}

std::string extend_prompt(const std::string& label, const DescriptionList& list, int count) {
  PromptContext ctx;
  ctx.label = label;
  ctx.list = &list;
  ctx.batch_count = count;
  return render_prompt(PromptKind::ExtendList, ctx);
}

double anchor_score(BackendClient& client, const ImageBuffer& image,
                    const std::string& anchor_text) {
  Embedding img = client.embed_image(image).normalized();
  Embedding txt = client.embed_text(anchor_text).normalized();
  return dot(img, txt);
}

}  // namespace

TEST_CASE("config validation") {
  MockBackendConfig bad;
  bad.duplicate_rate = 1.5;
  CHECK_THROWS_AS(MockBackend{bad}, ValidationError);
  bad = {};
  bad.embed_dim = 1;
  CHECK_THROWS_AS(MockBackend{bad}, ValidationError);
  bad = {};
  bad.image_size = 2;
  CHECK_THROWS_AS(MockBackend{bad}, ValidationError);
}

TEST_CASE("captions are deterministic, parseable sentences for the prompted class") {
  BackendClient client = make_client();
  PromptContext ctx;
  ctx.label = "red fox";
  std::string prompt = render_prompt(PromptKind::DescribeImage, ctx);

  std::string text = client.caption("img/a.jpg", prompt, 5);
  CHECK(text == client.caption("img/a.jpg", prompt, 5));

  Description d = parse_template1(text, "red fox");
  CHECK(d.features.size() >= 1);
  CHECK(d.features.size() <= 2);
  CHECK_FALSE(d.scene.empty());

  // a different source image or seed moves the caption
  CHECK(client.caption("img/b.jpg", prompt, 5) != text);
  CHECK(client.caption("img/a.jpg", prompt, 6) != text);

  CHECK_THROWS_AS(client.caption("img/a.jpg", "describe it please", 1), BackendError);
}

TEST_CASE("expansion replies are novel template sentences in slot order") {
  BackendClient client = make_client();
  DescriptionList empty;
  auto lines = client.expand(extend_prompt("red fox", empty, 5), 3);

  REQUIRE(lines.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(lines[static_cast<std::size_t>(i)] == mock_novel_description("red fox", i));
    CHECK_NOTHROW(parse_template1(lines[static_cast<std::size_t>(i)], "red fox"));
  }
}

TEST_CASE("expansion skips entries already on the embedded list") {
  BackendClient client = make_client();
  DescriptionList list;
  list.items.push_back(parse_template1(mock_novel_description("red fox", 0), "red fox"));
  list.items.push_back(parse_template1(mock_novel_description("red fox", 2), "red fox"));

  auto lines = client.expand(extend_prompt("red fox", list, 3), 3);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == mock_novel_description("red fox", 1));
  CHECK(lines[1] == mock_novel_description("red fox", 3));
  CHECK(lines[2] == mock_novel_description("red fox", 4));
}

TEST_CASE("the duplicate knob re-emits known lines") {
  MockBackendConfig config;
  config.duplicate_rate = 1.0;
  BackendClient client = make_client(config);

  DescriptionList list;
  list.items.push_back(parse_template1(mock_novel_description("red fox", 0), "red fox"));
  list.items.push_back(parse_template1(mock_novel_description("red fox", 1), "red fox"));

  auto lines = client.expand(extend_prompt("red fox", list, 10), 1);
  REQUIRE(lines.size() == 10);
  std::unordered_set<std::string> pool{list.items[0].raw_text, list.items[1].raw_text};
  for (const auto& line : lines) CHECK(pool.count(line) == 1);

  // with an empty list the first slot has nothing to duplicate, so it invents
  DescriptionList empty;
  auto from_empty = client.expand(extend_prompt("red fox", empty, 4), 1);
  REQUIRE(from_empty.size() == 4);
  CHECK(from_empty[0] == mock_novel_description("red fox", 0));
  for (std::size_t i = 1; i < from_empty.size(); ++i) CHECK(from_empty[i] == from_empty[0]);
}

TEST_CASE("novel descriptions wrap with a disambiguating mark") {
  std::string base = mock_novel_description("fox", 0);
  std::string wrapped = mock_novel_description("fox", 18 * 16 * 14);
  CHECK(base != wrapped);
  CHECK(wrapped.find("mark 1") != std::string::npos);
  CHECK_NOTHROW(parse_template1(wrapped, "fox"));
}

TEST_CASE("repeat removal keeps first occurrences in order") {
  BackendClient client = make_client();
  DescriptionList list;
  Description a = parse_template1(mock_novel_description("fox", 0), "fox");
  Description b = parse_template1(mock_novel_description("fox", 1), "fox");
  list.items = {a, b, a, b, a};

  PromptContext ctx;
  ctx.label = "fox";
  ctx.list = &list;
  auto kept = client.expand(render_prompt(PromptKind::RemoveRepeats, ctx), 0);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0] == a.raw_text);
  CHECK(kept[1] == b.raw_text);
}

TEST_CASE("summaries parse as feature templates") {
  BackendClient client = make_client();
  PromptContext ctx;
  ctx.label = "red fox";
  std::string text = client.summarize(render_prompt(PromptKind::SummarizeFeatures, ctx), 0);
  ClassFeatureTemplate t = parse_template2(text, "red fox");
  CHECK(t.features.size() == 2);
  // stable across calls: the anchor is a function of the class alone
  CHECK(text == client.summarize(render_prompt(PromptKind::SummarizeFeatures, ctx), 99));
}

TEST_CASE("refinement appends a marker per round") {
  BackendClient client = make_client();
  Description d = parse_template1(mock_novel_description("red fox", 0), "red fox");

  PromptContext ctx;
  ctx.label = "red fox";
  ctx.target = &d;
  std::string once = client.refine(render_prompt(PromptKind::RefineDescription, ctx), 0);
  Description d1 = parse_template1(once, "red fox");
  REQUIRE(d1.features.size() == d.features.size() + 1);
  CHECK(d1.features.back() == "refinement detail 1");
  CHECK(d1.scene == d.scene);

  ctx.target = &d1;
  std::string twice = client.refine(render_prompt(PromptKind::RefineDescription, ctx), 0);
  Description d2 = parse_template1(twice, "red fox");
  CHECK(d2.features.back() == "refinement detail 2");

  CHECK_THROWS_AS(client.refine("no quoted description here [fox]", 0), BackendError);
}

TEST_CASE("generated buffers embed to an exact score ladder against their class") {
  MockBackendConfig config;  // base 0.5, gain 0.2
  BackendClient client = make_client(config);

  std::string anchor = "A photo of the class [red fox] with amber coloring, sleek profile.";
  Description d = parse_template1(mock_novel_description("red fox", 0), "red fox");

  ImageBuffer rev0 = client.generate_image(d.raw_text, 1);
  CHECK(anchor_score(client, rev0, anchor) == doctest::Approx(0.5).epsilon(1e-9));

  PromptContext ctx;
  ctx.label = "red fox";
  ctx.target = &d;
  Description d1 = parse_template1(
      client.refine(render_prompt(PromptKind::RefineDescription, ctx), 0), "red fox");
  ImageBuffer rev1 = client.generate_image(d1.raw_text, 2);
  CHECK(anchor_score(client, rev1, anchor) == doctest::Approx(0.7).epsilon(1e-9));

  ctx.target = &d1;
  Description d2 = parse_template1(
      client.refine(render_prompt(PromptKind::RefineDescription, ctx), 0), "red fox");
  ImageBuffer rev2 = client.generate_image(d2.raw_text, 3);
  CHECK(anchor_score(client, rev2, anchor) == doctest::Approx(0.9).epsilon(1e-9));

  // cross-class similarity is zero: the embedding axes are disjoint
  CHECK(anchor_score(client, rev0, "A photo of a [snow owl].") ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("the score ladder clamps at one") {
  MockBackendConfig config;
  config.embed_base = 0.9;
  config.embed_gain = 0.2;
  BackendClient client = make_client(config);

  Description d = parse_template1(mock_novel_description("fox", 0), "fox");
  PromptContext ctx;
  ctx.label = "fox";
  ctx.target = &d;
  Description d1 =
      parse_template1(client.refine(render_prompt(PromptKind::RefineDescription, ctx), 0), "fox");
  ImageBuffer img = client.generate_image(d1.raw_text, 1);  // 0.9 + 0.2 clamps to 1.0
  CHECK(anchor_score(client, img, "A photo of a [fox].") == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("generation is deterministic in the description and seed") {
  BackendClient client = make_client();
  Description d = parse_template1(mock_novel_description("fox", 0), "fox");

  ImageBuffer a = client.generate_image(d.raw_text, 7);
  ImageBuffer b = client.generate_image(d.raw_text, 7);
  CHECK(a.data == b.data);

  ImageBuffer c = client.generate_image(d.raw_text, 8);
  CHECK(a.data != c.data);  // body noise differs with the seed
  // ...but the header (and so the embedding) only tracks the description
  BackendClient embed_client = make_client();
  CHECK(embed_client.embed_image(a).values == embed_client.embed_image(c).values);

  CHECK_THROWS_AS(client.generate_image("", 1), BackendError);
}

TEST_CASE("foreign buffers embed to a stable unit vector") {
  BackendClient client = make_client();
  ImageBuffer plain;
  plain.width = 8;
  plain.height = 8;
  plain.data.assign(8 * 8 * 3, 37.0);

  Embedding e = client.embed_image(plain);
  CHECK(e.norm() == doctest::Approx(1.0));
  CHECK(e.values == client.embed_image(plain).values);
}

TEST_CASE("text embeddings key on the bracketed label") {
  BackendClient client = make_client();
  Embedding a = client.embed_text("A photo of the class [red fox] with a tail.");
  Embedding b = client.embed_text("totally different sentence about [red fox] indeed");
  Embedding c = client.embed_text("A photo of the class [snow owl] with wings.");
  CHECK(a.values == b.values);
  CHECK(dot(a, c) == 0.0);
  CHECK_THROWS_AS(client.embed_text(""), BackendError);
}

TEST_CASE("procedural source images are deterministic and in range") {
  ImageBuffer a = procedural_image("img/x.jpg", 5, 16);
  ImageBuffer b = procedural_image("img/x.jpg", 5, 16);
  CHECK(a.data == b.data);
  CHECK(a.width == 16);
  CHECK(a.height == 16);
  CHECK(a.data.size() == 16 * 16 * 3);
  for (double v : a.data) {
    CHECK(v >= 0.0);
    CHECK(v <= 255.0);
  }
  ImageBuffer c = procedural_image("img/y.jpg", 5, 16);
  CHECK(a.data != c.data);
  CHECK_THROWS_AS(procedural_image("r", 1, 0), ValidationError);
}
