// Copyright 2026 The MolarCam Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include <gtest/gtest.h>

#include "molarcam/dataset.h"
#include "molarcam/errors.h"
#include "test_util.h"

namespace molarcam {
namespace {

using nlohmann::json;
using testing::TempDir;

ManifestEntry Labeled(CaseLabel l, int i) {
  ManifestEntry e;
  e.image = "img" + std::to_string(i) + ".png";
  e.label = l;
  return e;
}

TEST(Manifest, EmptyFileIsEmptyManifest) {
  TempDir dir;
  testing::WriteFile(dir / "m.json", "");
  EXPECT_TRUE(LoadManifest(dir / "m.json").entries.empty());
  testing::WriteFile(dir / "m2.json", "  \n");
  EXPECT_TRUE(LoadManifest(dir / "m2.json").entries.empty());
  EXPECT_TRUE(ParseManifest(json::parse(R"({"entries":[]})"), dir.path()).entries.empty());
}

TEST(Manifest, ParsesVocabulary) {
  const json doc = json::parse(R"({"entries":[{"image":"a.png","detections":[
      {"box":[1,2,30,40],"quadrant":"LL","angulation":"mesioangular"}],"label":"pericoronitis"}]})");
  const Manifest m = ParseManifest(doc, "/data", false);
  ASSERT_EQ(m.entries.size(), 1u);
  const ManifestEntry& e = m.entries[0];
  EXPECT_EQ(e.image_path, std::filesystem::path("/data/a.png"));
  ASSERT_EQ(e.detections.size(), 1u);
  EXPECT_EQ(e.detections[0].quadrant, Quadrant::kLL);
  EXPECT_EQ(e.detections[0].angulation, Angulation::kMesioangular);
  EXPECT_EQ(e.detections[0].box, (BBox{1, 2, 30, 40}));
  EXPECT_EQ(e.label, CaseLabel::kPericoronitis);
}

TEST(Manifest, VocabularyErrorsNameTheEntry) {
  const json doc = json::parse(R"({"entries":[{"image":"ok.png"},{"image":"bad.png","detections":[
      {"box":[1,2,30,40],"quadrant":"LL","angulation":"buccoangular"}]}]})");
  try {
    ParseManifest(doc, ".", false);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("bad.png"), std::string::npos) << what;
    EXPECT_NE(what.find("buccoangular"), std::string::npos) << what;
  }
  EXPECT_THROW(ParseManifest(json::parse(R"({"entries":[{"image":"a","label":"sick"}]})"), ".", false),
               InputError);
  EXPECT_THROW(ParseManifest(json::parse(R"({"entries":[{"image":"a","detections":[
      {"box":[5,5,1,1],"quadrant":"UR","angulation":"vertical"}]}]})"), ".", false),
               InputError);
  EXPECT_THROW(ParseManifest(json::parse("[1,2]"), ".", false), InputError);
}

TEST(Manifest, MalformedJsonIsInputError) {
  TempDir dir;
  testing::WriteFile(dir / "m.json", "{\"entries\": [");
  EXPECT_THROW(LoadManifest(dir / "m.json"), InputError);
  EXPECT_THROW(LoadManifest(dir / "absent.json"), InputError);
}

TEST(Manifest, MissingImagesAreSkippedWithWarning) {
  TempDir dir;
  testing::WriteFile(dir / "here.png", "x");
  testing::WriteFile(dir / "m.json", R"({"entries":[{"image":"here.png"},{"image":"gone.png"}]})");
  const Manifest m = LoadManifest(dir / "m.json");
  ASSERT_EQ(m.entries.size(), 1u);
  EXPECT_EQ(m.entries[0].image, "here.png");
  EXPECT_EQ(m.skipped, 1u);
  ASSERT_EQ(m.warnings.size(), 1u);
  EXPECT_NE(m.warnings[0].find("gone.png"), std::string::npos);
}

TEST(Manifest, SaveLoadRoundTrip) {
  TempDir dir;
  std::filesystem::create_directories(dir / "imgs");
  testing::WriteFile(dir / "imgs/a.png", "x");
  ManifestEntry e;
  e.image = "imgs/a.png";
  e.image_path = dir / "imgs/a.png";
  e.detections.push_back({{1, 2, 3, 4}, Quadrant::kUL, Angulation::kHorizontal});
  e.split = "val";
  SaveManifest(std::vector{e}, dir / "out/m.json");
  const Manifest back = LoadManifest(dir / "out/m.json");
  ASSERT_EQ(back.entries.size(), 1u);
  EXPECT_EQ(std::filesystem::weakly_canonical(back.entries[0].image_path),
            std::filesystem::weakly_canonical(e.image_path));
  EXPECT_EQ(back.entries[0].detections[0].angulation, Angulation::kHorizontal);
  EXPECT_EQ(back.entries[0].split, "val");
  EXPECT_FALSE(back.entries[0].label.has_value());
}

TEST(StratumKey, LabelThenDetectionSignature) {
  ManifestEntry e;
  EXPECT_EQ(StratumKey(e), "none");
  e.detections.push_back({{0, 0, 1, 1}, Quadrant::kLR, Angulation::kVertical});
  e.detections.push_back({{0, 0, 1, 1}, Quadrant::kUR, Angulation::kHorizontal});
  EXPECT_EQ(StratumKey(e), "det:2,12");
  e.label = CaseLabel::kNormal;
  EXPECT_EQ(StratumKey(e), "label:normal");
}

TEST(Split, SingleStratumOfTen) {
  std::vector<ManifestEntry> entries;
  for (int i = 0; i < 10; ++i) entries.push_back(Labeled(CaseLabel::kNormal, i));
  const SplitResult s = StratifiedSplit(entries, 0.8, 1);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.val.size(), 2u);
  EXPECT_TRUE(std::is_sorted(s.train.begin(), s.train.end()));
}

TEST(Split, PaperScaleCounts) {
  std::vector<ManifestEntry> entries;
  for (int i = 0; i < 1550; ++i) entries.push_back(Labeled(i % 2 ? CaseLabel::kPericoronitis : CaseLabel::kNormal, i));
  const SplitResult s = StratifiedSplit(entries, 0.8, 2024);
  std::map<CaseLabel, int> train, val;
  for (auto i : s.train) ++train[*entries[i].label];
  for (auto i : s.val) ++val[*entries[i].label];
  EXPECT_EQ(train[CaseLabel::kNormal], 620);
  EXPECT_EQ(train[CaseLabel::kPericoronitis], 620);
  EXPECT_EQ(val[CaseLabel::kNormal], 155);
  EXPECT_EQ(val[CaseLabel::kPericoronitis], 155);
}

TEST(Split, PartitionDeterminismAndStratumFractions) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<ManifestEntry> entries;
    const int n = 1 + static_cast<int>(rng() % 60);
    for (int i = 0; i < n; ++i) {
      ManifestEntry e;
      e.image = std::to_string(i);
      if (rng() % 3 == 0) {
        e.label = rng() % 2 ? CaseLabel::kNormal : CaseLabel::kPericoronitis;
      } else {
        e.detections.push_back({{0, 0, 1, 1}, static_cast<Quadrant>(rng() % 4),
                                static_cast<Angulation>(rng() % 2)});
      }
      entries.push_back(e);
    }
    const double ratio = 0.5 + 0.4 * (rng() % 100) / 100.0;
    const std::uint64_t seed = rng();
    const SplitResult a = StratifiedSplit(entries, ratio, seed);
    const SplitResult b = StratifiedSplit(entries, ratio, seed);
    EXPECT_EQ(a.train, b.train);
    std::vector<std::size_t> all = a.train;
    all.insert(all.end(), a.val.begin(), a.val.end());
    std::sort(all.begin(), all.end());
    ASSERT_EQ(all.size(), entries.size());
    for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);

    std::map<std::string, std::pair<int, int>> counts;  // (train, total)
    for (auto i : a.train) ++counts[StratumKey(entries[i])].first;
    for (std::size_t i = 0; i < entries.size(); ++i) ++counts[StratumKey(entries[i])].second;
    for (const auto& [key, c] : counts) {
      if (c.second == 1) {
        EXPECT_EQ(c.first, 1) << key;
      } else {
        EXPECT_LT(std::abs(c.first - ratio * c.second), 1.0) << key;
      }
    }
  }
}

TEST(Split, SeedChangesAssignment) {
  std::vector<ManifestEntry> entries;
  for (int i = 0; i < 40; ++i) entries.push_back(Labeled(CaseLabel::kNormal, i));
  EXPECT_NE(StratifiedSplit(entries, 0.8, 1).val, StratifiedSplit(entries, 0.8, 2).val);
}

TEST(Reviews, TallyExamples) {
  std::vector<ReaderReview> r;
  for (int i = 0; i < 50; ++i) r.push_back({std::to_string(i), "", i < 42});
  EXPECT_EQ(AgreementTally(r), 0.84);
  auto negated = r;
  for (auto& x : negated) x.agrees = !x.agrees;
  EXPECT_NEAR(AgreementTally(negated), 1.0 - AgreementTally(r), 1e-15);
  for (auto& x : r) x.agrees = true;
  EXPECT_EQ(AgreementTally(r), 1.0);
  EXPECT_THROW(AgreementTally({}), InputError);
}

TEST(Reviews, ParsingRejectsDuplicatesAndBadFields) {
  const auto ok = ParseReviews(json::parse(
      R"({"reviews":[{"case":"a","agrees":true,"overlay":"a.png"},{"case":"b","agrees":false}]})"));
  ASSERT_EQ(ok.size(), 2u);
  EXPECT_EQ(ok[0].overlay_path, "a.png");
  EXPECT_FALSE(ok[1].agrees);
  EXPECT_THROW(ParseReviews(json::parse(
                   R"({"reviews":[{"case":"a","agrees":true},{"case":"a","agrees":false}]})")),
               InputError);
  EXPECT_THROW(ParseReviews(json::parse(R"({"reviews":[{"case":"a","agrees":"yes"}]})")),
               InputError);
}

}  // namespace
}  // namespace molarcam
