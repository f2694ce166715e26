#include "extentlab/annotation.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>

#include "extentlab/errors.hpp"

namespace extentlab {

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t seconds = std::chrono::system_clock::to_time_t(now);
  const auto millis =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() %
      1000;
  std::tm tm{};
  gmtime_r(&seconds, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buffer, static_cast<int>(millis));
  return out;
}

void append_durably(const std::filesystem::path& path, const std::string& line) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string reason = std::strerror(errno);
      ::close(fd);
      throw IoError("cannot append to " + path.string() + ": " + reason);
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    const std::string reason = std::strerror(errno);
    ::close(fd);
    throw IoError("cannot sync " + path.string() + ": " + reason);
  }
  ::close(fd);
}

TokenSet argument_tokens(const PriorityAssignment& priorities) {
  TokenSet out;
  for (std::size_t i = 0; i < priorities.stages.size(); ++i) {
    if (priorities.stages[i] == Stage::kOA) out.insert(static_cast<int>(i));
  }
  return out;
}

}  // namespace

Json to_json(const AnnotationRecord& record) {
  return {{"sample_id", record.sample_id},
          {"annotator_id", record.annotator_id},
          {"label", record.label},
          {"revealed_tokens", record.revealed_tokens.indices()},
          {"semantic_class", std::string(to_string(record.semantic_class))},
          {"preselected", record.preselected},
          {"entity_types_revealed", record.entity_types_revealed},
          {"started_at", record.started_at},
          {"decided_at", record.decided_at}};
}

AnnotationRecord annotation_record_from_json(const Json& object) {
  const std::string context = "annotation record";
  AnnotationRecord record;
  record.sample_id = required_field<std::string>(object, "sample_id", context);
  record.annotator_id = required_field<std::string>(object, "annotator_id", context);
  record.label = required_field<std::string>(object, "label", context);
  record.revealed_tokens =
      TokenSet(required_field<std::vector<int>>(object, "revealed_tokens", context));
  record.semantic_class =
      stage_from_string(required_field<std::string>(object, "semantic_class", context));
  record.preselected = required_field<std::vector<std::string>>(object, "preselected", context);
  record.entity_types_revealed =
      optional_field<bool>(object, "entity_types_revealed", false, context);
  record.started_at = optional_field<std::string>(object, "started_at", "", context);
  record.decided_at = optional_field<std::string>(object, "decided_at", "", context);
  return record;
}

bool record_consistent(const AnnotationRecord& record, const PriorityAssignment& priorities) {
  const TokenSet arguments = argument_tokens(priorities);
  if (!record.revealed_tokens.includes(arguments)) return false;
  const int extra = static_cast<int>(record.revealed_tokens.size() - arguments.size());
  if (extra > static_cast<int>(priorities.order.size())) return false;
  TokenSet expected = arguments;
  for (int i = 0; i < extra; ++i) expected.insert(priorities.order[i]);
  if (expected != record.revealed_tokens) return false;
  const Stage last = extra == 0 ? Stage::kOA : priorities.stages[priorities.order[extra - 1]];
  return last == record.semantic_class;
}

AnnotationStore::AnnotationStore(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  const std::string text = read_file(path_);
  std::size_t begin = 0;
  std::size_t line = 0;
  while (begin < text.size()) {
    ++line;
    const std::size_t newline = text.find('\n', begin);
    if (newline == std::string::npos) {
      // Torn tail: the append never completed, so it was never acknowledged.
      std::filesystem::resize_file(path_, begin);
      break;
    }
    const std::string_view raw(text.data() + begin, newline - begin);
    begin = newline + 1;
    if (raw.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      AnnotationRecord record = annotation_record_from_json(Json::parse(raw));
      keys_.emplace(record.sample_id, record.annotator_id);
      records_.push_back(std::move(record));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(line) + ": " + e.what(), line);
    } catch (const Error& e) {
      throw ParseError("line " + std::to_string(line) + ": " + e.what(), line);
    }
  }
}

void AnnotationStore::append(const AnnotationRecord& record) {
  std::lock_guard lock(mutex_);
  if (keys_.contains({record.sample_id, record.annotator_id})) {
    throw ConflictError("sample '" + record.sample_id + "' already decided by '" +
                        record.annotator_id + "'");
  }
  append_durably(path_, to_json(record).dump() + "\n");
  keys_.emplace(record.sample_id, record.annotator_id);
  records_.push_back(record);
}

bool AnnotationStore::contains(const std::string& sample_id,
                               const std::string& annotator_id) const {
  std::lock_guard lock(mutex_);
  return keys_.contains({sample_id, annotator_id});
}

std::vector<AnnotationRecord> AnnotationStore::records(const std::string& annotator) const {
  std::lock_guard lock(mutex_);
  if (annotator.empty()) return records_;
  std::vector<AnnotationRecord> out;
  for (const auto& record : records_) {
    if (record.annotator_id == annotator) out.push_back(record);
  }
  return out;
}

void export_annotations(const AnnotationStore& store, const std::string& annotator,
                        const std::filesystem::path& out) {
  std::vector<Json> lines;
  for (const auto& record : store.records(annotator)) lines.push_back(to_json(record));
  write_file_atomic(out, to_jsonl(lines));
}

std::vector<AnnotationRecord> import_annotations(const std::filesystem::path& path) {
  std::vector<AnnotationRecord> out;
  for_each_jsonl(path, [&](std::size_t line, const Json& object) {
    try {
      out.push_back(annotation_record_from_json(object));
    } catch (const Error& e) {
      throw ParseError("line " + std::to_string(line) + ": " + e.what(), line);
    }
  });
  return out;
}

Json to_json(const AnnotationSession& session) {
  Json entity_types = Json::array();
  for (bool flag : session.entity_types) entity_types.push_back(flag);
  return {{"session_id", session.session_id},
          {"annotator_id", session.annotator_id},
          {"sample_ids", session.sample_ids},
          {"cursor", session.cursor},
          {"revealed", session.revealed},
          {"entity_types", entity_types},
          {"preselected", session.preselected},
          {"started_at", session.started_at}};
}

AnnotationSession annotation_session_from_json(const Json& object) {
  const std::string context = "session";
  AnnotationSession session;
  session.session_id = required_field<std::string>(object, "session_id", context);
  session.annotator_id = required_field<std::string>(object, "annotator_id", context);
  session.sample_ids = required_field<std::vector<std::string>>(object, "sample_ids", context);
  session.cursor = required_field<int>(object, "cursor", context);
  session.revealed = required_field<std::vector<int>>(object, "revealed", context);
  session.entity_types = required_field<std::vector<bool>>(object, "entity_types", context);
  session.preselected =
      required_field<std::vector<std::vector<std::string>>>(object, "preselected", context);
  session.started_at = required_field<std::vector<std::string>>(object, "started_at", context);
  const std::size_t n = session.sample_ids.size();
  if (session.revealed.size() != n || session.entity_types.size() != n ||
      session.preselected.size() != n || session.started_at.size() != n) {
    throw ValidationError("session '" + session.session_id + "' has ragged per-sample state");
  }
  return session;
}

Json to_json(const SampleView& view) {
  Json tokens = Json::array();
  for (const auto& token : view.tokens) {
    tokens.push_back({{"index", token.index},
                      {"text", token.text},
                      {"revealed", token.revealed},
                      {"role", token.role}});
  }
  Json types = nullptr;
  if (view.entity_types) {
    types = {{"arg1", {{"type", view.entity_types->arg1_type},
                       {"subtype", view.entity_types->arg1_subtype}}},
             {"arg2", {{"type", view.entity_types->arg2_type},
                       {"subtype", view.entity_types->arg2_subtype}}}};
  }
  return {{"end", false},
          {"session_id", view.session_id},
          {"sample_id", view.sample_id},
          {"position", view.position},
          {"total", view.total},
          {"tokens", tokens},
          {"preselected", view.preselected},
          {"entity_types", types},
          {"semantic_class", std::string(to_string(view.semantic_class))},
          {"all_revealed", view.all_revealed}};
}

AnnotationService::AnnotationService(std::span<const RelationSample> samples,
                                     const Classifier& decider, AnnotationStore& store,
                                     std::optional<std::filesystem::path> session_file)
    : decider_(decider), store_(store), session_file_(std::move(session_file)) {
  for (const auto& sample : samples) {
    entries_.emplace(sample.sample_id, Entry{sample, stage_assignment(sample)});
  }
  if (session_file_ && std::filesystem::exists(*session_file_)) {
    const Json saved = Json::parse(read_file(*session_file_));
    next_session_ = required_field<int>(saved, "next_session", "session file");
    for (const auto& raw : required_field<Json>(saved, "sessions", "session file")) {
      AnnotationSession session = annotation_session_from_json(raw);
      skip_decided(session);
      sessions_.emplace(session.session_id, std::move(session));
    }
  }
}

const AnnotationService::Entry& AnnotationService::entry(const std::string& sample_id) const {
  auto it = entries_.find(sample_id);
  if (it == entries_.end()) throw NotFoundError("unknown sample '" + sample_id + "'");
  return it->second;
}

const PriorityAssignment& AnnotationService::priorities(const std::string& sample_id) const {
  return entry(sample_id).priorities;
}

AnnotationSession& AnnotationService::find_session(const std::string& session_id) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + session_id + "'");
  return it->second;
}

// Moves the cursor past samples whose decision already reached the store;
// covers a crash between the record append and the session write.
void AnnotationService::skip_decided(AnnotationSession& session) {
  while (!session.exhausted() &&
         store_.contains(session.sample_ids[session.cursor], session.annotator_id)) {
    ++session.cursor;
  }
  if (!session.exhausted() && session.started_at[session.cursor].empty()) {
    session.started_at[session.cursor] = utc_now();
  }
}

void AnnotationService::persist() {
  if (!session_file_) return;
  Json sessions = Json::array();
  for (const auto& [id, session] : sessions_) sessions.push_back(to_json(session));
  write_file_atomic(*session_file_,
                    Json{{"next_session", next_session_}, {"sessions", sessions}}.dump());
}

AnnotationSession AnnotationService::start_session(const std::string& annotator_id,
                                                   const std::vector<std::string>& sample_ids,
                                                   int k) {
  if (annotator_id.empty()) throw InvalidArgument("annotator id must not be empty");
  if (sample_ids.empty()) throw InvalidArgument("session needs at least one sample");
  if (k < 1) throw InvalidArgument("k must be at least 1");
  std::lock_guard lock(mutex_);
  AnnotationSession session;
  session.annotator_id = annotator_id;
  for (const auto& id : sample_ids) {
    const Entry& e = entry(id);
    std::vector<std::string> labels;
    for (int index : top_k_labels(decider_, e.sample, k)) {
      labels.push_back(decider_.label_set()[index]);
    }
    session.sample_ids.push_back(id);
    session.preselected.push_back(std::move(labels));
  }
  const std::size_t n = sample_ids.size();
  session.revealed.assign(n, 0);
  session.entity_types.assign(n, false);
  session.started_at.assign(n, "");
  session.session_id = "s" + std::to_string(++next_session_);
  skip_decided(session);
  sessions_.emplace(session.session_id, session);
  persist();
  return session;
}

AnnotationSession AnnotationService::session(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + session_id + "'");
  return it->second;
}

TokenSet AnnotationService::revealed_tokens(const AnnotationSession& session) const {
  const PriorityAssignment& pa = entry(session.sample_ids[session.cursor]).priorities;
  TokenSet out = argument_tokens(pa);
  for (int i = 0; i < session.revealed[session.cursor]; ++i) out.insert(pa.order[i]);
  return out;
}

SampleView AnnotationService::build_view(const AnnotationSession& session) const {
  const Entry& e = entry(session.sample_ids[session.cursor]);
  const RelationSample& sample = e.sample;
  const TokenSet revealed = revealed_tokens(session);
  SampleView view;
  view.session_id = session.session_id;
  view.sample_id = sample.sample_id;
  view.position = session.cursor;
  view.total = static_cast<int>(session.sample_ids.size());
  for (const auto& token : sample.sentence->tokens) {
    ViewToken out;
    out.index = token.index;
    out.revealed = revealed.contains(token.index);
    out.text = out.revealed ? token.text : std::string(kHiddenPlaceholder);
    out.role = sample.arg1.contains(token.index)   ? "arg1"
               : sample.arg2.contains(token.index) ? "arg2"
                                                   : "context";
    view.tokens.push_back(std::move(out));
  }
  view.preselected = session.preselected[session.cursor];
  if (session.entity_types[session.cursor]) {
    view.entity_types = ArgumentTypes{sample.arg1.entity_type, sample.arg1.entity_subtype,
                                      sample.arg2.entity_type, sample.arg2.entity_subtype};
  }
  const int shown = session.revealed[session.cursor];
  view.semantic_class = shown == 0 ? Stage::kOA : e.priorities.stages[e.priorities.order[shown - 1]];
  view.all_revealed = shown == static_cast<int>(e.priorities.order.size());
  return view;
}

std::optional<SampleView> AnnotationService::view(const std::string& session_id) {
  std::lock_guard lock(mutex_);
  AnnotationSession& session = find_session(session_id);
  if (session.exhausted()) return std::nullopt;
  return build_view(session);
}

SampleView AnnotationService::expand(const std::string& session_id) {
  std::lock_guard lock(mutex_);
  AnnotationSession& session = find_session(session_id);
  if (session.exhausted()) throw ConflictError("session '" + session_id + "' is exhausted");
  const auto& order = entry(session.sample_ids[session.cursor]).priorities.order;
  int& shown = session.revealed[session.cursor];
  if (shown < static_cast<int>(order.size())) {
    ++shown;
    persist();
  }
  return build_view(session);
}

SampleView AnnotationService::reveal_entity_types(const std::string& session_id) {
  std::lock_guard lock(mutex_);
  AnnotationSession& session = find_session(session_id);
  if (session.exhausted()) throw ConflictError("session '" + session_id + "' is exhausted");
  if (!session.entity_types[session.cursor]) {
    session.entity_types[session.cursor] = true;
    persist();
  }
  return build_view(session);
}

AnnotationRecord AnnotationService::submit(const std::string& session_id,
                                           const std::string& label) {
  std::lock_guard lock(mutex_);
  AnnotationSession& session = find_session(session_id);
  if (session.exhausted()) throw ConflictError("session '" + session_id + "' is exhausted");
  const auto& allowed = session.preselected[session.cursor];
  if (label != kReject && std::find(allowed.begin(), allowed.end(), label) == allowed.end()) {
    throw ValidationError("label '" + label + "' is not among the preselected labels");
  }
  const SampleView current = build_view(session);
  AnnotationRecord record;
  record.sample_id = current.sample_id;
  record.annotator_id = session.annotator_id;
  record.label = label;
  record.revealed_tokens = revealed_tokens(session);
  record.semantic_class = current.semantic_class;
  record.preselected = allowed;
  record.entity_types_revealed = session.entity_types[session.cursor];
  record.started_at = session.started_at[session.cursor];
  record.decided_at = utc_now();
  store_.append(record);
  ++session.cursor;
  skip_decided(session);
  persist();
  return record;
}

}  // namespace extentlab
