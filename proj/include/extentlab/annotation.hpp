#ifndef EXTENTLAB_ANNOTATION_HPP_
#define EXTENTLAB_ANNOTATION_HPP_

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "extentlab/classifier.hpp"
#include "extentlab/corpus.hpp"
#include "extentlab/io.hpp"
#include "extentlab/syntax.hpp"
#include "extentlab/token_set.hpp"

namespace extentlab {

inline constexpr std::string_view kReject = "REJECT";
inline constexpr std::string_view kHiddenPlaceholder = "___";

struct AnnotationRecord {
  std::string sample_id;
  std::string annotator_id;
  std::string label;  // a preselected label or REJECT
  TokenSet revealed_tokens;
  Stage semantic_class = Stage::kOA;
  std::vector<std::string> preselected;
  bool entity_types_revealed = false;
  std::string started_at;  // ISO 8601, UTC
  std::string decided_at;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

Json to_json(const AnnotationRecord& record);
AnnotationRecord annotation_record_from_json(const Json& object);

// True when the revealed set is the arguments plus a prefix of the
// expansion order and the class is the stage of the last revealed token.
bool record_consistent(const AnnotationRecord& record,
                       const PriorityAssignment& priorities);

// Append-only JSON Lines log. Every append is flushed and fsynced before
// it returns. A torn final line (crash mid-append) is ignored on open.
class AnnotationStore {
 public:
  explicit AnnotationStore(std::filesystem::path path);

  // Throws ConflictError when (sample_id, annotator_id) is already stored.
  void append(const AnnotationRecord& record);

  bool contains(const std::string& sample_id, const std::string& annotator_id) const;
  // All records in log order; an empty filter selects every annotator.
  std::vector<AnnotationRecord> records(const std::string& annotator = {}) const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::vector<AnnotationRecord> records_;
  std::set<std::pair<std::string, std::string>> keys_;
};

void export_annotations(const AnnotationStore& store, const std::string& annotator,
                        const std::filesystem::path& out);
std::vector<AnnotationRecord> import_annotations(const std::filesystem::path& path);

struct AnnotationSession {
  std::string session_id;
  std::string annotator_id;
  std::vector<std::string> sample_ids;
  int cursor = 0;
  // Per sample: number of expansion-order tokens revealed, entity type flag,
  // frozen preselection and the time the sample was first shown.
  std::vector<int> revealed;
  std::vector<bool> entity_types;
  std::vector<std::vector<std::string>> preselected;
  std::vector<std::string> started_at;

  bool exhausted() const { return cursor >= static_cast<int>(sample_ids.size()); }
};

Json to_json(const AnnotationSession& session);
AnnotationSession annotation_session_from_json(const Json& object);

struct ViewToken {
  int index = 0;
  std::string text;  // kHiddenPlaceholder while hidden
  bool revealed = false;
  std::string role;  // "arg1" | "arg2" | "context"
};

struct ArgumentTypes {
  std::string arg1_type;
  std::string arg1_subtype;
  std::string arg2_type;
  std::string arg2_subtype;
};

struct SampleView {
  std::string session_id;
  std::string sample_id;
  int position = 0;
  int total = 0;
  std::vector<ViewToken> tokens;
  std::vector<std::string> preselected;
  std::optional<ArgumentTypes> entity_types;
  Stage semantic_class = Stage::kOA;
  bool all_revealed = false;
};

Json to_json(const SampleView& view);

// The staged-reveal protocol over a fixed sample pool. Operations are
// serialized; records reach the store before submit returns. With a
// session file the session table survives restarts.
class AnnotationService {
 public:
  AnnotationService(std::span<const RelationSample> samples, const Classifier& decider,
                    AnnotationStore& store,
                    std::optional<std::filesystem::path> session_file = std::nullopt);

  // Throws InvalidArgument for an empty list or k < 1, NotFoundError for
  // an unknown id.
  AnnotationSession start_session(const std::string& annotator_id,
                                  const std::vector<std::string>& sample_ids, int k = 3);
  AnnotationSession session(const std::string& session_id) const;

  // nullopt once every sample of the session was decided.
  std::optional<SampleView> view(const std::string& session_id);
  // Reveals the next token of the expansion order; a no-op once all are
  // visible. Throws ConflictError on an exhausted session.
  SampleView expand(const std::string& session_id);
  SampleView reveal_entity_types(const std::string& session_id);
  // Throws ValidationError for a label outside the preselection plus
  // REJECT, ConflictError on an exhausted session or duplicate decision.
  AnnotationRecord submit(const std::string& session_id, const std::string& label);

  const PriorityAssignment& priorities(const std::string& sample_id) const;
  AnnotationStore& store() { return store_; }

 private:
  struct Entry {
    RelationSample sample;
    PriorityAssignment priorities;
  };

  AnnotationSession& find_session(const std::string& session_id);
  const Entry& entry(const std::string& sample_id) const;
  void skip_decided(AnnotationSession& session);
  SampleView build_view(const AnnotationSession& session) const;
  TokenSet revealed_tokens(const AnnotationSession& session) const;
  void persist();

  std::map<std::string, Entry> entries_;
  const Classifier& decider_;
  AnnotationStore& store_;
  std::optional<std::filesystem::path> session_file_;
  mutable std::mutex mutex_;
  std::map<std::string, AnnotationSession> sessions_;
  int next_session_ = 0;
};

}  // namespace extentlab

#endif  // EXTENTLAB_ANNOTATION_HPP_
