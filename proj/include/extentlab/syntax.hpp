#ifndef EXTENTLAB_SYNTAX_HPP_
#define EXTENTLAB_SYNTAX_HPP_

#include <string_view>
#include <vector>

#include "extentlab/corpus.hpp"
#include "extentlab/io.hpp"
#include "extentlab/token_set.hpp"

namespace extentlab {

// Reveal stages, in priority order: only arguments, argument subtrees,
// verbs on the path between the arguments, tokens between the arguments,
// the corpus-annotated extent, everything else.
enum class Stage { kOA = 0, kAS, kVOP, kBA, kE, kA };

inline constexpr int kStageCount = 6;

std::string_view to_string(Stage stage);
// Throws InvalidArgument for unknown names.
Stage stage_from_string(std::string_view name);

struct PriorityAssignment {
  std::vector<Stage> stages;  // one per sentence token
  std::vector<int> order;     // non-OA tokens by (stage, index)

  Stage stage_of(int token) const { return stages.at(token); }

  // Highest stage among the non-argument members of `tokens`; OA when there
  // are none. This is the semantic class of a candidate.
  Stage class_of(const TokenSet& tokens) const;

  friend bool operator==(const PriorityAssignment&,
                         const PriorityAssignment&) = default;
};

// The token of `span` whose head lies outside the span (or is the root);
// leftmost on ties.
int span_head(const Sentence& sentence, const TokenSpan& span);

// Transitive dependents of both span heads, minus the argument tokens.
TokenSet argument_subtree_tokens(const Sentence& sentence,
                                 const ArgumentSpan& arg1,
                                 const ArgumentSpan& arg2);

// Tree path from `from` up to the lowest common ancestor and down to `to`,
// both ends inclusive.
std::vector<int> dependency_path(const Sentence& sentence, int from, int to);

bool is_verb_tag(std::string_view pos);

PriorityAssignment stage_assignment(const RelationSample& sample);

std::vector<int> expansion_order(const PriorityAssignment& assignment);

Json to_json(const PriorityAssignment& assignment);
PriorityAssignment priority_assignment_from_json(const Json& object);

}  // namespace extentlab

#endif  // EXTENTLAB_SYNTAX_HPP_
