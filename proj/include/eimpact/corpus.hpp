#pragma once
// Conversation records: CSV ingestion, language/media filtering, and reply
// linkage.

#include <chrono>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eimpact {

using NodeId = std::string;
using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;

// Parses RFC 3339 ("2022-03-01T10:15:00Z", fractional seconds and numeric
// offsets accepted). Returns nullopt on anything else.
std::optional<Timestamp> parse_timestamp(std::string_view text);
// Canonical UTC form, fractional part only when non-zero.
std::string format_timestamp(Timestamp ts);

struct ConversationRecord {
  NodeId id;
  std::string conversation_id;
  std::string author_id;
  Timestamp created_at{};
  std::optional<std::string> in_reply_to_user_id;
  std::optional<NodeId> parent_id;
  std::string lang;
  std::string text;
  std::optional<std::string> entities;

  bool operator==(const ConversationRecord&) const = default;
};

// Total arrival order: created_at, then id.
bool arrival_before(const ConversationRecord& a, const ConversationRecord& b);

// Numeric-aware id ordering ("2" < "10"); plain lexicographic otherwise.
bool id_less(std::string_view a, std::string_view b);
struct IdLess {
  using is_transparent = void;
  bool operator()(std::string_view a, std::string_view b) const { return id_less(a, b); }
};

enum class DropReason {
  LangFiltered,
  EmptyText,
  MediaOnly,
  OrphanParent,
  SelfLoopDropped,
};
std::string_view to_string(DropReason reason);

struct DroppedRecord {
  NodeId id;
  DropReason reason;
  bool operator==(const DroppedRecord&) const = default;
};

struct Conversation {
  std::string conversation_id;
  std::vector<ConversationRecord> records;  // arrival order
  std::vector<DroppedRecord> dropped;
};

// Throws MissingColumn, MalformedRow, DuplicateId.
std::vector<ConversationRecord> parse_records(std::istream& source);
void write_records(std::ostream& out, std::span<const ConversationRecord> records);

struct FilterResult {
  std::vector<ConversationRecord> kept;
  std::vector<DroppedRecord> dropped;
};

// Removes URLs (http://, https://, www.) and media placeholders, returning
// what is left of the text.
std::string strip_urls(std::string_view text);

FilterResult filter_records(std::span<const ConversationRecord> records,
                            const std::set<std::string>& lang_allow = {"en"});

// Groups records by conversation_id (sorted by id) with each group in arrival
// order.
std::vector<Conversation> group_conversations(std::vector<ConversationRecord> records);

struct ParentResolution {
  NodeId root;
  std::map<NodeId, NodeId> parents;   // every kept non-root record
  std::vector<DroppedRecord> dropped; // orphans (removed) and self-loops (link discarded)
};

// Root: the record whose id equals conversation_id; otherwise the unique
// record with neither parent_id nor in_reply_to_user_id. Throws NoRoot or
// MultipleRoots(ids).
ParentResolution resolve_parents(std::span<const ConversationRecord> records);

// Drops orphaned records (per `resolution`) from the conversation and
// appends every diagnostic to conversation.dropped.
void apply_resolution(Conversation& conversation, const ParentResolution& resolution);

}  // namespace eimpact
