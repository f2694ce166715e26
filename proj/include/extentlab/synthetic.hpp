#ifndef EXTENTLAB_SYNTHETIC_HPP_
#define EXTENTLAB_SYNTHETIC_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "extentlab/corpus.hpp"
#include "extentlab/io.hpp"
#include "extentlab/metrics.hpp"

namespace extentlab {

// A token given by surface form and parse; offsets are derived.
struct TokenSpec {
  std::string text;
  std::string pos;
  int head = kRootHead;
  std::string deprel;
};

// Joins the tokens with single spaces and fills in character offsets.
Sentence make_sentence(std::string doc_id, int sent_index,
                       const std::vector<TokenSpec>& tokens);

// Synthetic relation corpora with hand-built dependency parses.
//   kArgumentDetermined: the label is a function of the second argument's
//     head word; verbs and prepositions are drawn independently of it.
//   kContextDetermined: the label is a function of the main verb; argument
//     words are shared across labels.
enum class SyntheticKind { kArgumentDetermined, kContextDetermined };

std::string_view to_string(SyntheticKind kind);
SyntheticKind synthetic_kind_from_string(std::string_view name);

struct SyntheticOptions {
  SyntheticKind kind = SyntheticKind::kArgumentDetermined;
  int count = 400;
  std::uint64_t seed = 1;
  // Fraction of samples whose label-bearing word comes from a held-out
  // pool that the regular draws never use.
  double holdout_fraction = 0.0;
  std::string id_prefix = "syn";
};

// One document per sample, one sentence each.
std::vector<Document> synthetic_corpus(const SyntheticOptions& options);

std::vector<std::string> synthetic_labels();

// Adversarial groups: each original keeps its argument texts while the main
// verb is replaced by a verb that signals a different label.
std::vector<AdversarialGroup> verb_swap_groups(
    const std::vector<RelationSample>& originals, int group_count,
    int variants_per_group, std::uint64_t seed);

// Adversarial file record for `sample`.
Json adversarial_record(const RelationSample& sample, const std::string& group_id,
                        bool original);

}  // namespace extentlab

#endif  // EXTENTLAB_SYNTHETIC_HPP_
