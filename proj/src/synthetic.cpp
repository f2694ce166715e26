#include "extentlab/synthetic.hpp"

#include <algorithm>
#include <random>
#include <iomanip>
#include <sstream>

#include "extentlab/errors.hpp"

namespace extentlab {

namespace {

using Pool = std::vector<std::string>;

struct LabelVocabulary {
  std::string label;
  std::string entity_type;
  Pool heads;
  Pool holdout_heads;
  Pool verbs;
  Pool holdout_verbs;
};

const std::vector<LabelVocabulary>& vocabulary() {
  static const std::vector<LabelVocabulary> kVocabulary = {
      {"Employer", "ORG",
       {"Acme", "Globex", "Initech", "Hooli", "Vandelay", "Soylent", "Cyberdyne",
        "Tyrell", "Wonka", "Stark"},
       {"Nakatomi", "Oscorp", "Gringotts"},
       {"works", "worked", "serves"},
       {"labors"}},
      {"Family", "PER",
       {"wife", "brother", "sister", "cousin", "father", "mother", "uncle", "aunt",
        "nephew", "niece"},
       {"stepson", "godmother", "grandpa"},
       {"married", "adopted", "divorced"},
       {"wed"}},
      {"Founder", "ORG",
       {"Zapster", "Blinko", "Quillo", "Fizzle", "Mondo", "Vexa", "Plinth",
        "Zorbit", "Kwik", "Lumo"},
       {"Trello", "Yonder", "Brisk"},
       {"founded", "launched", "created"},
       {"incorporated"}},
      {"Located", "GPE",
       {"Paris", "Berlin", "Tokyo", "Lagos", "Lima", "Oslo", "Cairo", "Dublin",
        "Quito", "Hanoi"},
       {"Reykjavik", "Tbilisi", "Asuncion"},
       {"lives", "lived", "stays"},
       {"resides"}},
  };
  return kVocabulary;
}

const Pool kFirstNames = {"John", "Mary", "Ahmed", "Li", "Sofia", "Carlos",
                          "Priya", "Olga", "Kenji", "Fatima", "Lucas", "Emma"};
const Pool kSurnames = {"Smith", "Khan", "Chen", "Garcia", "Ivanova", "Sato"};
const Pool kNeutralVerbs = {"met", "saw", "called", "praised", "described",
                            "mentioned", "thanked", "emailed"};
const Pool kPrepositions = {"at", "with", "near", "for", "about"};
const Pool kAdverbs = {"previously", "recently", "reportedly"};
const Pool kModifiers = {"North", "Global", "New", "Old"};

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  const std::string& pick(const Pool& pool) { return pool[rng_() % pool.size()]; }
  bool coin(double p) { return uniform() < p; }
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

 private:
  std::mt19937_64 rng_;
};

struct Layout {
  std::vector<TokenSpec> tokens;
  TokenSpan arg1;
  TokenSpan arg2;
  bool has_preposition = false;
};

// ARG1 [aux] [adv] VERB [prep] [det] ARG2 [trailer] .
Layout build_layout(Draw& draw, const std::string& verb, const std::string& arg2_word) {
  Layout layout;
  auto& t = layout.tokens;
  auto push = [&](std::string text, std::string pos) {
    t.push_back({std::move(text), std::move(pos), kRootHead, ""});
    return static_cast<int>(t.size()) - 1;
  };
  std::vector<std::pair<int, std::string>> verb_deps;
  std::vector<std::pair<int, std::string>> arg2_deps;

  const int first = push(draw.pick(kFirstNames), "PROPN");
  int arg1_head = first;
  if (draw.coin(0.4)) {
    arg1_head = push(draw.pick(kSurnames), "PROPN");
    t[first].head = arg1_head;
    t[first].deprel = "flat";
  }
  layout.arg1 = {0, arg1_head + 1};
  verb_deps.emplace_back(arg1_head, "nsubj");

  if (draw.coin(0.3)) verb_deps.emplace_back(push(draw.coin(0.5) ? "had" : "has", "AUX"), "aux");
  if (draw.coin(0.3)) verb_deps.emplace_back(push(draw.pick(kAdverbs), "ADV"), "advmod");
  const int verb_index = push(verb, "VERB");
  t[verb_index].deprel = "root";

  if (draw.coin(0.7)) {
    arg2_deps.emplace_back(push(draw.pick(kPrepositions), "ADP"), "case");
    layout.has_preposition = true;
  }
  if (draw.coin(0.4)) {
    static const Pool kDeterminers = {"the", "his", "our"};
    arg2_deps.emplace_back(push(draw.pick(kDeterminers), "DET"), "det");
  }
  const int arg2_start = static_cast<int>(t.size());
  if (draw.coin(0.3)) arg2_deps.emplace_back(push(draw.pick(kModifiers), "PROPN"), "compound");
  const int arg2_head = push(arg2_word, "PROPN");
  layout.arg2 = {arg2_start, arg2_head + 1};
  verb_deps.emplace_back(arg2_head, layout.has_preposition ? "obl" : "obj");

  const double trailer = draw.uniform();
  if (trailer < 0.2) {
    verb_deps.emplace_back(push("again", "ADV"), "advmod");
  } else if (trailer < 0.4) {
    const int last = push("last", "ADJ");
    const int year = push("year", "NOUN");
    t[last].head = year;
    t[last].deprel = "amod";
    verb_deps.emplace_back(year, "obl:tmod");
  }
  verb_deps.emplace_back(push(".", "PUNCT"), "punct");

  for (const auto& [index, rel] : verb_deps) {
    t[index].head = verb_index;
    t[index].deprel = rel;
  }
  for (const auto& [index, rel] : arg2_deps) {
    t[index].head = arg2_head;
    t[index].deprel = rel;
  }
  return layout;
}

int root_verb(const Sentence& sentence) {
  for (const auto& token : sentence.tokens) {
    if (token.head == kRootHead && token.pos == "VERB") return token.index;
  }
  return -1;
}

}  // namespace

Sentence make_sentence(std::string doc_id, int sent_index,
                       const std::vector<TokenSpec>& tokens) {
  Sentence sentence;
  sentence.doc_id = std::move(doc_id);
  sentence.sent_index = sent_index;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) sentence.text += ' ';
    Token token;
    token.index = static_cast<int>(i);
    token.text = tokens[i].text;
    token.char_start = static_cast<int>(sentence.text.size());
    sentence.text += tokens[i].text;
    token.char_end = static_cast<int>(sentence.text.size());
    token.pos = tokens[i].pos;
    token.head = tokens[i].head;
    token.deprel = tokens[i].deprel;
    sentence.tokens.push_back(std::move(token));
  }
  return sentence;
}

std::string_view to_string(SyntheticKind kind) {
  return kind == SyntheticKind::kArgumentDetermined ? "argument" : "context";
}

SyntheticKind synthetic_kind_from_string(std::string_view name) {
  if (name == "argument") return SyntheticKind::kArgumentDetermined;
  if (name == "context") return SyntheticKind::kContextDetermined;
  throw InvalidArgument("unknown synthetic kind '" + std::string(name) + "'");
}

std::vector<std::string> synthetic_labels() {
  std::vector<std::string> labels;
  for (const auto& entry : vocabulary()) labels.push_back(entry.label);
  return labels;
}

std::vector<Document> synthetic_corpus(const SyntheticOptions& options) {
  if (options.count < 0) throw InvalidArgument("synthetic count must be non-negative");
  if (options.holdout_fraction < 0.0 || options.holdout_fraction > 1.0) {
    throw InvalidArgument("holdout fraction must lie in [0, 1]");
  }
  Draw draw(options.seed);
  const auto& vocab = vocabulary();
  Pool shared_words;
  std::vector<std::string> shared_types;
  for (const auto& entry : vocab) {
    for (const auto& word : entry.heads) {
      shared_words.push_back(word);
      shared_types.push_back(entry.entity_type);
    }
  }

  std::vector<Document> documents;
  documents.reserve(options.count);
  for (int n = 0; n < options.count; ++n) {
    const LabelVocabulary& entry = vocab[draw.index(vocab.size())];
    const bool holdout = draw.coin(options.holdout_fraction);
    std::string verb;
    std::string arg2_word;
    std::string arg2_type;
    if (options.kind == SyntheticKind::kArgumentDetermined) {
      verb = draw.pick(kNeutralVerbs);
      arg2_word = draw.pick(holdout ? entry.holdout_heads : entry.heads);
      arg2_type = entry.entity_type;
    } else {
      verb = draw.pick(holdout ? entry.holdout_verbs : entry.verbs);
      const std::size_t w = draw.index(shared_words.size());
      arg2_word = shared_words[w];
      arg2_type = shared_types[w];
    }
    Layout layout = build_layout(draw, verb, arg2_word);

    std::ostringstream id;
    id << options.id_prefix << '-' << std::setw(5) << std::setfill('0') << n;
    Document doc;
    doc.doc_id = id.str();
    doc.genre = draw.coin(0.5) ? "news" : "web";
    doc.sentences.push_back(make_sentence(doc.doc_id, 0, layout.tokens));
    doc.entities.push_back({{0, {layout.arg1.start, layout.arg1.end, "PER", ""}}});
    doc.entities.push_back({{0, {layout.arg2.start, layout.arg2.end, arg2_type, ""}}});
    RelationMention relation;
    relation.label = entry.label;
    relation.syntactic_class = layout.has_preposition ? SyntacticClass::kPreposition
                                                      : SyntacticClass::kVerbal;
    relation.arg1 = {0, layout.arg1.start, layout.arg1.end};
    relation.arg2 = {0, layout.arg2.start, layout.arg2.end};
    relation.extent = TokenSpan{layout.arg1.start, layout.arg2.end};
    doc.relations.push_back(relation);
    documents.push_back(std::move(doc));
  }
  return documents;
}

std::vector<AdversarialGroup> verb_swap_groups(const std::vector<RelationSample>& originals,
                                               int group_count, int variants_per_group,
                                               std::uint64_t seed) {
  if (group_count < 0 || variants_per_group < 1) {
    throw InvalidArgument("group count must be non-negative and variants positive");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(originals.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

  std::vector<AdversarialGroup> groups;
  for (std::size_t pick : order) {
    if (static_cast<int>(groups.size()) >= group_count) break;
    const RelationSample& source = originals[pick];
    const int verb = root_verb(*source.sentence);
    if (verb < 0 || source.arg1.contains(verb) || source.arg2.contains(verb)) continue;

    std::vector<std::pair<std::string, std::string>> candidates;  // (verb, label)
    for (const auto& entry : vocabulary()) {
      if (entry.label == source.label) continue;
      for (const auto& word : entry.verbs) candidates.emplace_back(word, entry.label);
    }
    for (std::size_t i = candidates.size(); i > 1; --i) {
      std::swap(candidates[i - 1], candidates[rng() % i]);
    }

    AdversarialGroup group;
    group.group_id = "adv-" + std::to_string(groups.size());
    group.original = source;
    group.original.sample_id = group.group_id + ":original";
    const int variants = std::min<int>(variants_per_group, static_cast<int>(candidates.size()));
    for (int v = 0; v < variants; ++v) {
      std::vector<TokenSpec> specs;
      for (const auto& token : source.sentence->tokens) {
        specs.push_back({token.text, token.pos, token.head, token.deprel});
      }
      specs[verb].text = candidates[v].first;
      RelationSample variant = source;
      variant.sentence = std::make_shared<const Sentence>(
          make_sentence(group.group_id, 0, specs));
      variant.sample_id = group.group_id + ":v" + std::to_string(v);
      variant.label = candidates[v].second;
      variant.genre = "adversarial";
      group.variants.push_back(std::move(variant));
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

Json adversarial_record(const RelationSample& sample, const std::string& group_id,
                        bool original) {
  const Sentence& sentence = *sample.sentence;
  auto chars = [&](const ArgumentSpan& arg) {
    return std::vector<int>{sentence.tokens[arg.start].char_start,
                            sentence.tokens[arg.end - 1].char_end};
  };
  const Json encoded = sentence_to_json(sentence);
  return {{"group_id", group_id},
          {"role", original ? "original" : "variant"},
          {"text", sentence.text},
          {"arg1_char", chars(sample.arg1)},
          {"arg2_char", chars(sample.arg2)},
          {"tokens", encoded.at("tokens")},
          {"intended_label", sample.label}};
}

}  // namespace extentlab
