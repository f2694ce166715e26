#include "extentlab/syntax.hpp"

#include <algorithm>
#include <optional>

#include "extentlab/errors.hpp"

namespace extentlab {

namespace {

constexpr std::string_view kStageNames[kStageCount] = {"OA",  "AS", "VOP",
                                                       "BA", "E",  "A"};

std::vector<std::vector<int>> children_of(const Sentence& sentence) {
  std::vector<std::vector<int>> children(sentence.size());
  for (const auto& token : sentence.tokens) {
    if (token.head != kRootHead) children[token.head].push_back(token.index);
  }
  return children;
}

void collect_descendants(const std::vector<std::vector<int>>& children,
                         int node, TokenSet& out) {
  for (int child : children[node]) {
    if (out.contains(child)) continue;
    out.insert(child);
    collect_descendants(children, child, out);
  }
}

// `token`, its head, its head's head, ... up to the root.
std::vector<int> ancestors_inclusive(const Sentence& sentence, int token) {
  std::vector<int> chain{token};
  while (sentence.tokens[chain.back()].head != kRootHead &&
         chain.size() <= sentence.tokens.size()) {
    chain.push_back(sentence.tokens[chain.back()].head);
  }
  return chain;
}

}  // namespace

std::string_view to_string(Stage stage) {
  return kStageNames[static_cast<int>(stage)];
}

Stage stage_from_string(std::string_view name) {
  for (int i = 0; i < kStageCount; ++i) {
    if (kStageNames[i] == name) return static_cast<Stage>(i);
  }
  throw InvalidArgument("unknown semantic class '" + std::string(name) + "'");
}

Stage PriorityAssignment::class_of(const TokenSet& tokens) const {
  Stage highest = Stage::kOA;
  for (int token : tokens) highest = std::max(highest, stages.at(token));
  return highest;
}

int span_head(const Sentence& sentence, const TokenSpan& span) {
  for (int i = span.start; i < span.end; ++i) {
    const int head = sentence.tokens.at(i).head;
    if (head == kRootHead || !span.contains(head)) return i;
  }
  return span.start;
}

TokenSet argument_subtree_tokens(const Sentence& sentence,
                                 const ArgumentSpan& arg1,
                                 const ArgumentSpan& arg2) {
  const auto children = children_of(sentence);
  TokenSet subtree;
  collect_descendants(children, span_head(sentence, arg1.span()), subtree);
  collect_descendants(children, span_head(sentence, arg2.span()), subtree);
  TokenSet arguments;
  for (int i = arg1.start; i < arg1.end; ++i) arguments.insert(i);
  for (int i = arg2.start; i < arg2.end; ++i) arguments.insert(i);
  return subtree.minus(arguments);
}

std::vector<int> dependency_path(const Sentence& sentence, int from, int to) {
  const auto up_from = ancestors_inclusive(sentence, from);
  const auto up_to = ancestors_inclusive(sentence, to);
  std::vector<int> path;
  for (int node : up_from) {
    path.push_back(node);
    auto meet = std::find(up_to.begin(), up_to.end(), node);
    if (meet != up_to.end()) {
      for (auto it = std::make_reverse_iterator(meet); it != up_to.rend(); ++it) {
        path.push_back(*it);
      }
      return path;
    }
  }
  // Unreachable for a validated single-rooted tree.
  throw ConsistencyError("tokens " + std::to_string(from) + " and " +
                         std::to_string(to) + " share no ancestor");
}

bool is_verb_tag(std::string_view pos) { return pos == "VERB" || pos == "AUX"; }

PriorityAssignment stage_assignment(const RelationSample& sample) {
  const Sentence& sentence = *sample.sentence;
  const int n = sentence.size();
  std::vector<std::optional<Stage>> staged(n);
  auto assign = [&](int token, Stage stage) {
    if (!staged[token]) staged[token] = stage;
  };

  for (int token : sample.argument_tokens()) assign(token, Stage::kOA);
  for (int token : argument_subtree_tokens(sentence, sample.arg1, sample.arg2)) {
    assign(token, Stage::kAS);
  }
  const auto path = dependency_path(sentence,
                                    span_head(sentence, sample.arg1.span()),
                                    span_head(sentence, sample.arg2.span()));
  for (int token : path) {
    if (is_verb_tag(sentence.tokens[token].pos)) assign(token, Stage::kVOP);
  }
  const ArgumentSpan& left =
      sample.arg1.start <= sample.arg2.start ? sample.arg1 : sample.arg2;
  const ArgumentSpan& right =
      sample.arg1.start <= sample.arg2.start ? sample.arg2 : sample.arg1;
  for (int token = left.end; token < right.start; ++token) {
    assign(token, Stage::kBA);
  }
  if (sample.extent_span) {
    const int begin = std::max(0, sample.extent_span->start);
    const int end = std::min(n, sample.extent_span->end);
    for (int token = begin; token < end; ++token) assign(token, Stage::kE);
  }

  PriorityAssignment assignment;
  assignment.stages.reserve(n);
  for (int token = 0; token < n; ++token) {
    assignment.stages.push_back(staged[token].value_or(Stage::kA));
  }
  assignment.order = expansion_order(assignment);
  return assignment;
}

std::vector<int> expansion_order(const PriorityAssignment& assignment) {
  std::vector<int> order;
  for (int token = 0; token < static_cast<int>(assignment.stages.size());
       ++token) {
    if (assignment.stages[token] != Stage::kOA) order.push_back(token);
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return assignment.stages[a] < assignment.stages[b];
  });
  return order;
}

Json to_json(const PriorityAssignment& assignment) {
  Json stages = Json::array();
  for (Stage stage : assignment.stages) stages.push_back(std::string(to_string(stage)));
  return {{"stages", stages}, {"order", assignment.order}};
}

PriorityAssignment priority_assignment_from_json(const Json& object) {
  PriorityAssignment assignment;
  for (const auto& name :
       required_field<std::vector<std::string>>(object, "stages", "priority")) {
    assignment.stages.push_back(stage_from_string(name));
  }
  assignment.order = required_field<std::vector<int>>(object, "order", "priority");
  return assignment;
}

}  // namespace extentlab
