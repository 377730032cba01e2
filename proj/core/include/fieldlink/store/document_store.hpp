#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace fieldlink::store {

using Json = nlohmann::json;

struct Document {
  std::string id;
  std::uint64_t version = 0;
  Json payload;
};

struct ListQuery {
  // Keep only documents whose payload[field] equals value.
  std::optional<std::pair<std::string, Json>> where;
  // Ordered by id; start strictly after this id.
  std::string after_id;
  std::size_t limit = std::numeric_limits<std::size_t>::max();

  static ListQuery matching(std::string field, Json value) {
    ListQuery q;
    q.where.emplace(std::move(field), std::move(value));
    return q;
  }
};

struct StoreOptions {
  // fsync each journal append in addition to flushing it.
  bool sync_writes = false;
  // Journal records per collection before an automatic snapshot.
  std::size_t compact_after = 4096;
};

// Versioned JSON documents grouped into named collections.
//
// Every successful write is appended to `<dir>/docs/<collection>.journal`
// as one canonical-JSON line before it becomes visible. Snapshots
// (`<collection>.snapshot`) plus the journal tail are replayed on open;
// a torn final line is discarded.
class DocumentStore {
 public:
  explicit DocumentStore(std::filesystem::path dir, StoreOptions options = {});
  ~DocumentStore();

  DocumentStore(const DocumentStore&) = delete;
  DocumentStore& operator=(const DocumentStore&) = delete;

  /// Writes iff the stored version equals `expected` (0 = must not exist).
  /// Returns the new version. Throws Error(version_conflict) otherwise.
  std::uint64_t put_cas(std::string_view collection, std::string_view id, std::uint64_t expected, Json payload);

  /// Throws Error(not_found).
  Document get(std::string_view collection, std::string_view id) const;
  std::optional<Document> find(std::string_view collection, std::string_view id) const;
  std::vector<Document> list(std::string_view collection, const ListQuery& query = {}) const;
  std::size_t count(std::string_view collection) const;
  std::vector<std::string> collections() const;

  /// Snapshot every collection and truncate the journals.
  void compact();

  /// Digest over every (collection, id, version, payload); equal iff the
  /// stores hold identical contents.
  std::string fingerprint() const;

  const std::filesystem::path& directory() const noexcept { return dir_; }

 private:
  struct Collection;

  Collection* collection(std::string_view name) const;
  void load_existing();
  void compact_locked(Collection& c);

  std::filesystem::path dir_;
  StoreOptions options_;
  mutable std::mutex collections_mu_;
  mutable std::map<std::string, std::unique_ptr<Collection>, std::less<>> collections_;
};

/// Read-modify-write helper: retries `mutate` on version conflicts.
/// `mutate` receives the current payload (null if absent) and returns the
/// replacement. Returns the stored document.
template <class F>
Document update_with_retry(DocumentStore& store, std::string_view collection, std::string_view id, F&& mutate);

}  // namespace fieldlink::store

#include "fieldlink/common/error.hpp"

namespace fieldlink::store {

template <class F>
Document update_with_retry(DocumentStore& store, std::string_view collection, std::string_view id, F&& mutate) {
  for (;;) {
    auto current = store.find(collection, id);
    const std::uint64_t expected = current ? current->version : 0;
    Json next = mutate(current ? current->payload : Json());
    try {
      const auto v = store.put_cas(collection, id, expected, next);
      return Document{std::string(id), v, std::move(next)};
    } catch (const Error& e) {
      if (e.code() != Errc::version_conflict) throw;
    }
  }
}

}  // namespace fieldlink::store
