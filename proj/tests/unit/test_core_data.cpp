#include <fstream>

#include <gtest/gtest.h>

#include "mtlaqa/annotation.hpp"
#include "mtlaqa/dive_label.hpp"
#include "mtlaqa/errors.hpp"
#include "mtlaqa/vocabulary.hpp"
#include "support.hpp"

using namespace mtlaqa;

namespace {

const DiveLabelSchema& schema() { return DiveLabelSchema::standard(); }

std::string error_of(const DiveFields& f) {
  try {
    resolve_label(f, schema());
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(DiveLabelSchema, CardinalitiesAndHalfSteps) {
  const std::array<std::int64_t, 5> expected{3, 2, 4, 10, 8};
  EXPECT_EQ(schema().cardinalities(), expected);
  EXPECT_EQ(schema().total_classes(), 27);
  for (const auto* list : {&schema().somersault_classes, &schema().twist_classes}) {
    for (std::size_t i = 1; i < list->size(); ++i) EXPECT_DOUBLE_EQ((*list)[i] - (*list)[i - 1], 0.5);
    EXPECT_DOUBLE_EQ(list->front(), 0.0);
  }
  EXPECT_DOUBLE_EQ(schema().somersault_classes.back(), 4.5);
  EXPECT_DOUBLE_EQ(schema().twist_classes.back(), 3.5);
}

TEST(LabelFromRecord, WorkedExamples) {
  // indices are positions in the schema lists
  EXPECT_EQ(resolve_label({"Tuck", "No", "Backwards", 3.5, 0.0}, schema()), (DiveLabel{1, 0, 2, 7, 0}));
  EXPECT_EQ(resolve_label({"Free", "Yes", "Backwards", 2.0, 2.5}, schema()), (DiveLabel{0, 1, 2, 4, 5}));
}

TEST(LabelFromRecord, RejectionsNameTheField) {
  const auto out_of_range = error_of({"Pike", "No", "Forward", 5.0, 0.0});
  EXPECT_NE(out_of_range.find("out of range"), std::string::npos);
  EXPECT_NE(out_of_range.find("somersault"), std::string::npos);
  EXPECT_NE(error_of({"Pike", "No", "Forward", 1.25, 0.0}).find("0.5 grid"), std::string::npos);
  EXPECT_NE(error_of({"Pike", "No", "Sideways", 1.0, 0.0}).find("rotation"), std::string::npos);
  EXPECT_NE(error_of({"Straight", "No", "Inward", 1.0, 0.0}).find("position"), std::string::npos);
  EXPECT_NE(error_of({"Pike", "No", "Inward", 1.0, 4.0}).find("twist"), std::string::npos);
}

TEST(LabelFromRecord, TotalOnTheCrossProduct) {
  const auto& s = schema();
  std::size_t count = 0;
  for (std::size_t p = 0; p < s.position_classes.size(); ++p)
    for (std::size_t a = 0; a < s.armstand_classes.size(); ++a)
      for (std::size_t r = 0; r < s.rotation_classes.size(); ++r)
        for (std::size_t so = 0; so < s.somersault_classes.size(); ++so)
          for (std::size_t t = 0; t < s.twist_classes.size(); ++t) {
            const DiveFields f{s.position_classes[p], s.armstand_classes[a], s.rotation_classes[r],
                               s.somersault_classes[so], s.twist_classes[t]};
            const auto label = resolve_label(f, s);
            ASSERT_EQ(label, DiveLabel::from_array({static_cast<std::int64_t>(p), static_cast<std::int64_t>(a),
                                                    static_cast<std::int64_t>(r), static_cast<std::int64_t>(so),
                                                    static_cast<std::int64_t>(t)}));
            ASSERT_EQ(resolve_label(describe_label(label, s), s), label);
            ++count;
          }
  EXPECT_EQ(count, 3u * 2 * 4 * 10 * 8);
}

TEST(DiveLabel, OneHotHasOneOnePerBlock) {
  const DiveLabel label{2, 1, 3, 9, 7};
  const auto v = one_hot(label, schema());
  ASSERT_EQ(v.size(), 27u);
  const auto card = schema().cardinalities();
  std::size_t offset = 0;
  const auto idx = label.as_array();
  for (std::size_t b = 0; b < 5; ++b) {
    float block_sum = 0.0F;
    for (std::int64_t k = 0; k < card[b]; ++k) block_sum += v[offset + static_cast<std::size_t>(k)];
    EXPECT_FLOAT_EQ(block_sum, 1.0F);
    EXPECT_FLOAT_EQ(v[offset + static_cast<std::size_t>(idx[b])], 1.0F);
    offset += static_cast<std::size_t>(card[b]);
  }
  EXPECT_THROW(validate_label({3, 0, 0, 0, 0}, schema()), ValidationError);
}

TEST(AqaScore, NormalizesAndRejects) {
  const auto s = AqaScore::from_raw(75.0, 100.0);
  EXPECT_DOUBLE_EQ(s.normalized, 0.75);
  EXPECT_THROW(AqaScore::from_raw(-1.0, 100.0), ValidationError);
  EXPECT_THROW(AqaScore::from_raw(1.0, 0.0), ValidationError);
}

TEST(Tokenize, LowercasesAndStripsEdges) {
  const std::vector<std::string> expected{"what", "a", "dive", "3.5", "o'neil"};
  EXPECT_EQ(tokenize("  What a DIVE!!  (3.5) \"O'Neil\"  -- "), expected);
  EXPECT_TRUE(tokenize("").empty());
}

TEST(Vocabulary, ReservedBlockAndBijection) {
  const auto v = Vocabulary::build({{"good", "dive"}, {"dive", "entry"}});
  EXPECT_EQ(v.size(), kNumReserved + 3);
  EXPECT_EQ(v.token_at(kPad), "<pad>");
  EXPECT_EQ(v.index_of("nothing"), kUnk);
  for (std::int64_t i = 0; i < v.size(); ++i) EXPECT_EQ(v.index_of(v.token_at(i)), i);

  testkit::TempDir dir("vocab");
  v.save(dir.path() / "vocab.txt");
  EXPECT_EQ(Vocabulary::load(dir.path() / "vocab.txt"), v);
}

TEST(EncodeCaption, EmptyAndDirectLookup) {
  const auto v = Vocabulary::from_tokens({"good", "dive"});
  const auto empty = encode_caption("", v);
  EXPECT_EQ(empty.indices, (std::vector<std::int64_t>{kStart, kEnd}));
  EXPECT_EQ(empty.length, 0u);
  const auto c = encode_caption("Good dive.", v);
  EXPECT_EQ(c.indices, (std::vector<std::int64_t>{kStart, v.index_of("good"), v.index_of("dive"), kEnd}));
  EXPECT_EQ(c.length, 2u);
  EXPECT_EQ(encode_caption("good splash", v).indices[2], kUnk);
}

TEST(EncodeCaption, TruncatesLongText) {
  // reference count: words separated by single spaces, punctuation on the edges only
  std::string text;
  std::size_t reference = 0;
  for (int i = 0; i < 150; ++i) {
    text += (i % 3 == 0 ? "(w" : "w") + std::to_string(i) + (i % 2 ? ", " : " ");
    ++reference;
  }
  reference = std::min<std::size_t>(reference, 100);
  std::vector<std::vector<std::string>> corpus{tokenize(text)};
  const auto v = Vocabulary::build(corpus);
  const auto c = encode_caption(text, v);
  EXPECT_EQ(c.length, reference);
  EXPECT_EQ(c.indices.size(), reference + 2);
  EXPECT_EQ(c.indices.back(), kEnd);
}

TEST(EncodeCaption, RoundTripReproducesNormalizedTokens) {
  const std::string text = "A forward dive, tuck position; clean ENTRY!";
  const auto tokens = tokenize(text);
  const auto v = Vocabulary::build({tokens});
  EXPECT_EQ(decode_caption(encode_caption(text, v), v), tokens);
}

TEST(AnnotationFile, ReportsLinesAndRejectsDuplicates) {
  testkit::TempDir dir("ann");
  const auto path = dir.path() / "a.jsonl";
  {
    std::ofstream out(path);
    out << R"({"schema_version": 1, "normalization_constant": 100.0})" << '\n'
        << R"({"sample_id": "a", "frame_range": [0, 9], "raw_score": 50, "position": "Tuck", "armstand": "No", "rotation": "Inward", "somersaults": 1.5, "twists": 0, "caption_text": "x"})" << '\n'
        << R"({"sample_id": "b", "frame_range": [0, 9], "raw_score": 50, "position": "Tuck", "armstand": false, "rotation": "Spiral", "somersaults": 1.5, "twists": 0, "caption_text": "x"})" << '\n'
        << "not json\n";
  }
  const auto f = read_annotation_file(path);
  ASSERT_TRUE(f.has_header);
  EXPECT_DOUBLE_EQ(f.header.normalization_constant, 100.0);
  ASSERT_EQ(f.records.size(), 1u);
  ASSERT_EQ(f.errors.size(), 2u);
  EXPECT_EQ(f.errors[0].line, 3u);
  EXPECT_NE(f.errors[0].message.find("rotation"), std::string::npos);
  EXPECT_EQ(f.errors[1].line, 4u);

  {
    std::ofstream out(path, std::ios::app);
    out << R"({"sample_id": "a", "frame_range": [0, 9], "raw_score": 50, "position": "Tuck", "armstand": "No", "rotation": "Inward", "somersaults": 1.5, "twists": 0, "caption_text": "x"})" << '\n';
  }
  EXPECT_THROW(read_annotation_file(path), ValidationError);
}

TEST(AnnotationFile, WriteReadRoundTrip) {
  testkit::TempDir dir("ann_rt");
  AnnotationRecord r;
  r.sample_id = "s1";
  r.video_path = "clips/s1";
  r.frame_range = {3, 40};
  r.raw_score = 81.6;
  r.dive = {"Pike", "Yes", "Reverse", 2.5, 1.0};
  r.caption_text = "pike reverse";
  r.latents = {{"bounces", 3.0}};
  DatasetHeader h;
  h.normalization_constant = 104.5;
  write_annotation_file(dir.path() / "a.jsonl", h, {r});
  const auto f = read_annotation_file(dir.path() / "a.jsonl");
  ASSERT_EQ(f.records.size(), 1u);
  const auto& back = f.records[0];
  EXPECT_EQ(back.sample_id, r.sample_id);
  EXPECT_EQ(back.video_path, r.video_path);
  EXPECT_EQ(back.frame_range.count(), 38);
  EXPECT_DOUBLE_EQ(back.raw_score, r.raw_score);
  EXPECT_EQ(label_from_record(back, schema()), (DiveLabel{2, 1, 1, 5, 2}));
  EXPECT_EQ(back.latents, r.latents);
  EXPECT_DOUBLE_EQ(f.header.normalization_constant, 104.5);
}

TEST(AnnotationFile, MissingFileNamesPath) {
  try {
    read_annotation_file("/nonexistent/annotations.jsonl");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/annotations.jsonl"), std::string::npos);
  }
}
