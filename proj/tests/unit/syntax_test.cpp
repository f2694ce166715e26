#include <gtest/gtest.h>

#include <deque>
#include <random>

#include "extentlab/errors.hpp"
#include "extentlab/syntax.hpp"
#include "fixtures.hpp"

namespace extentlab {
namespace {

using testing::nbc_sample;

std::vector<Stage> stages(std::initializer_list<const char*> names) {
  std::vector<Stage> out;
  for (const char* name : names) out.push_back(stage_from_string(name));
  return out;
}

TEST(Syntax, NbcStages) {
  const PriorityAssignment pa = stage_assignment(nbc_sample());
  EXPECT_EQ(pa.stages, stages({"OA", "BA", "BA", "VOP", "AS", "OA", "OA", "A"}));
  EXPECT_EQ(pa.order, (std::vector<int>{4, 3, 1, 2, 7}));
}

TEST(Syntax, NbcClassOf) {
  const PriorityAssignment pa = stage_assignment(nbc_sample());
  EXPECT_EQ(pa.class_of({0, 5, 6}), Stage::kOA);
  EXPECT_EQ(pa.class_of({0, 3, 4, 5, 6}), Stage::kVOP);
  EXPECT_EQ(pa.class_of({0, 4, 5, 6, 7}), Stage::kA);
}

TEST(Syntax, ExtentStageFillsUnassignedTokens) {
  RelationSample sample = nbc_sample();
  sample.extent_span = TokenSpan{0, 8};
  const PriorityAssignment pa = stage_assignment(sample);
  EXPECT_EQ(pa.stage_of(7), Stage::kE);
  EXPECT_EQ(pa.stage_of(1), Stage::kBA);
}

TEST(Syntax, SpanHeadAndPath) {
  const auto sentence = testing::nbc_sentence();
  EXPECT_EQ(span_head(*sentence, {5, 7}), 6);
  EXPECT_EQ(span_head(*sentence, {0, 1}), 0);
  EXPECT_EQ(dependency_path(*sentence, 0, 6), (std::vector<int>{0, 3, 6}));
  EXPECT_EQ(dependency_path(*sentence, 4, 5), (std::vector<int>{4, 6, 5}));
  EXPECT_EQ(dependency_path(*sentence, 3, 3), (std::vector<int>{3}));
}

TEST(Syntax, SubtreeExcludesArguments) {
  const RelationSample sample = nbc_sample();
  EXPECT_EQ(argument_subtree_tokens(*sample.sentence, sample.arg1, sample.arg2), TokenSet({4}));
}

TEST(Syntax, JsonRoundTrip) {
  const PriorityAssignment pa = stage_assignment(nbc_sample());
  EXPECT_EQ(priority_assignment_from_json(to_json(pa)), pa);
  EXPECT_THROW(stage_from_string("XX"), InvalidArgument);
}

// Independent reimplementation: descendants by walking heads upwards, the
// path by breadth-first search on the undirected tree.
std::vector<Stage> oracle_stages(const RelationSample& sample) {
  const Sentence& s = *sample.sentence;
  const int n = s.size();
  auto head_of_span = [&](const ArgumentSpan& a) {
    for (int i = a.start; i < a.end; ++i) {
      if (s.tokens[i].head < a.start || s.tokens[i].head >= a.end) return i;
    }
    return a.start;
  };
  const int h1 = head_of_span(sample.arg1);
  const int h2 = head_of_span(sample.arg2);
  auto in_args = [&](int t) { return sample.arg1.contains(t) || sample.arg2.contains(t); };
  auto below = [&](int t, int ancestor) {
    for (int cur = s.tokens[t].head; cur != kRootHead; cur = s.tokens[cur].head) {
      if (cur == ancestor) return true;
    }
    return false;
  };
  std::vector<int> prev(n, -2);
  std::deque<int> queue{h1};
  prev[h1] = -1;
  while (!queue.empty()) {
    const int cur = queue.front();
    queue.pop_front();
    for (int other = 0; other < n; ++other) {
      const bool adjacent = s.tokens[other].head == cur || s.tokens[cur].head == other;
      if (adjacent && prev[other] == -2) {
        prev[other] = cur;
        queue.push_back(other);
      }
    }
  }
  std::vector<bool> on_path(n, false);
  for (int cur = h2; cur != -1; cur = prev[cur]) on_path[cur] = true;

  const int lo = std::min(sample.arg1.end, sample.arg2.end);
  const int hi = std::max(sample.arg1.start, sample.arg2.start);
  std::vector<Stage> out(n);
  for (int t = 0; t < n; ++t) {
    const std::string& pos = s.tokens[t].pos;
    if (in_args(t)) out[t] = Stage::kOA;
    else if (below(t, h1) || below(t, h2)) out[t] = Stage::kAS;
    else if (on_path[t] && (pos == "VERB" || pos == "AUX")) out[t] = Stage::kVOP;
    else if (t >= lo && t < hi) out[t] = Stage::kBA;
    else if (sample.extent_span && sample.extent_span->contains(t)) out[t] = Stage::kE;
    else out[t] = Stage::kA;
  }
  return out;
}

TEST(Syntax, RandomTreesMatchOracle) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    const auto fixture = testing::random_fixture(rng, 3, 12, "r" + std::to_string(i));
    validate_sentence(*fixture.sample.sentence);
    const PriorityAssignment pa = stage_assignment(fixture.sample);
    ASSERT_EQ(pa.stages, oracle_stages(fixture.sample)) << fixture.sample.sentence->text;
    std::vector<int> expected;
    for (int s = 1; s < kStageCount; ++s) {
      for (int t = 0; t < fixture.sample.size(); ++t) {
        if (pa.stages[t] == static_cast<Stage>(s)) expected.push_back(t);
      }
    }
    ASSERT_EQ(pa.order, expected);
  }
}

}  // namespace
}  // namespace extentlab
