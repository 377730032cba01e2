#include "fieldlink/store/document_store.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <unistd.h>

#include "fieldlink/common/crypto.hpp"
#include "fieldlink/common/error.hpp"

namespace fieldlink::store {

namespace fs = std::filesystem;

struct DocumentStore::Collection {
  struct Entry {
    std::uint64_t version;
    Json payload;
  };

  std::string name;
  fs::path journal_path;
  fs::path snapshot_path;
  mutable std::shared_mutex mu;
  std::map<std::string, Entry, std::less<>> docs;
  std::FILE* journal = nullptr;
  std::size_t journal_records = 0;

  ~Collection() {
    if (journal != nullptr) std::fclose(journal);
  }
};

namespace {

void validate_collection_name(std::string_view name) {
  if (name.empty() || name.size() > 64) throw Error(Errc::invalid_argument, "bad collection name");
  for (char c : name) {
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) {
      throw Error(Errc::invalid_argument, "bad collection name '" + std::string(name) + "'");
    }
  }
}

std::string record_line(std::string_view id, std::uint64_t version, const Json& payload) {
  Json rec = {{"id", id}, {"v", version}, {"p", payload}};
  auto line = rec.dump();
  line += '\n';
  return line;
}

// Applies snapshot/journal lines. Returns the byte offset just past the last
// complete record; a torn tail is left for the caller to cut off.
template <class Apply>
std::uintmax_t replay(const fs::path& path, Apply&& apply) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return 0;
  std::uintmax_t good = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (in.eof()) break;  // no trailing newline: torn write
    Json rec;
    try {
      rec = Json::parse(line);
      apply(rec.at("id").get<std::string>(), rec.at("v").get<std::uint64_t>(), std::move(rec.at("p")));
    } catch (const Json::exception&) {
      // Only the final record may be torn; anything earlier is corruption.
      std::string rest;
      if (std::getline(in, rest)) throw Error(Errc::io_error, "corrupt store record in " + path.string());
      break;
    }
    good += line.size() + 1;
  }
  return good;
}

void write_all(std::FILE* f, const std::string& data, bool sync, const std::string& what) {
  if (std::fwrite(data.data(), 1, data.size(), f) != data.size() || std::fflush(f) != 0) {
    throw Error(Errc::io_error, "cannot append to " + what);
  }
  if (sync) ::fsync(::fileno(f));
}

}  // namespace

DocumentStore::DocumentStore(fs::path dir, StoreOptions options) : dir_(std::move(dir)), options_(options) {
  fs::create_directories(dir_ / "docs");
  load_existing();
}

DocumentStore::~DocumentStore() = default;

void DocumentStore::load_existing() {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir_ / "docs")) {
    const auto ext = entry.path().extension();
    if (ext == ".journal" || ext == ".snapshot") {
      auto stem = entry.path().stem().string();
      if (std::find(names.begin(), names.end(), stem) == names.end()) names.push_back(stem);
    }
  }
  for (const auto& name : names) {
    auto* c = collection(name);
    auto apply = [c](std::string id, std::uint64_t v, Json payload) {
      auto it = c->docs.find(id);
      if (it == c->docs.end()) {
        c->docs.emplace(std::move(id), Collection::Entry{v, std::move(payload)});
      } else if (v > it->second.version) {
        it->second = {v, std::move(payload)};
      }
    };
    replay(c->snapshot_path, apply);
    std::size_t records = 0;
    const auto good = replay(c->journal_path, [&](std::string id, std::uint64_t v, Json p) {
      ++records;
      apply(std::move(id), v, std::move(p));
    });
    if (fs::exists(c->journal_path) && fs::file_size(c->journal_path) != good) {
      // Reopen below appends, so drop the torn tail first.
      std::fclose(c->journal);
      fs::resize_file(c->journal_path, good);
      c->journal = std::fopen(c->journal_path.c_str(), "ab");
    }
    c->journal_records = records;
  }
}

DocumentStore::Collection* DocumentStore::collection(std::string_view name) const {
  std::lock_guard lock(collections_mu_);
  auto it = collections_.find(name);
  if (it != collections_.end()) return it->second.get();
  validate_collection_name(name);
  auto c = std::make_unique<Collection>();
  c->name = std::string(name);
  c->journal_path = dir_ / "docs" / (c->name + ".journal");
  c->snapshot_path = dir_ / "docs" / (c->name + ".snapshot");
  c->journal = std::fopen(c->journal_path.c_str(), "ab");
  if (c->journal == nullptr) throw Error(Errc::io_error, "cannot open journal " + c->journal_path.string());
  auto* raw = c.get();
  collections_.emplace(c->name, std::move(c));
  return raw;
}

std::uint64_t DocumentStore::put_cas(std::string_view coll, std::string_view id, std::uint64_t expected,
                                     Json payload) {
  if (id.empty()) throw Error(Errc::invalid_argument, "document id must not be empty");
  auto* c = collection(coll);
  std::unique_lock lock(c->mu);
  auto it = c->docs.find(id);
  const std::uint64_t current = it == c->docs.end() ? 0 : it->second.version;
  if (current != expected) {
    throw Error(Errc::version_conflict, std::string(coll) + "/" + std::string(id) + " is at version " +
                                           std::to_string(current) + ", expected " + std::to_string(expected),
                {{"current_version", current}});
  }
  const std::uint64_t next = current + 1;
  // Durable first, visible second.
  write_all(c->journal, record_line(id, next, payload), options_.sync_writes, c->journal_path.string());
  if (it == c->docs.end()) {
    c->docs.emplace(std::string(id), Collection::Entry{next, std::move(payload)});
  } else {
    it->second = {next, std::move(payload)};
  }
  if (++c->journal_records >= options_.compact_after) compact_locked(*c);
  return next;
}

Document DocumentStore::get(std::string_view coll, std::string_view id) const {
  auto doc = find(coll, id);
  if (!doc) throw Error(Errc::not_found, std::string(coll) + "/" + std::string(id) + " not found");
  return *doc;
}

std::optional<Document> DocumentStore::find(std::string_view coll, std::string_view id) const {
  {
    std::lock_guard lock(collections_mu_);
    if (!collections_.contains(coll)) return std::nullopt;
  }
  auto* c = collection(coll);
  std::shared_lock lock(c->mu);
  auto it = c->docs.find(id);
  if (it == c->docs.end()) return std::nullopt;
  return Document{it->first, it->second.version, it->second.payload};
}

std::vector<Document> DocumentStore::list(std::string_view coll, const ListQuery& query) const {
  {
    std::lock_guard lock(collections_mu_);
    if (!collections_.contains(coll)) return {};
  }
  auto* c = collection(coll);
  std::shared_lock lock(c->mu);
  std::vector<Document> out;
  auto it = query.after_id.empty() ? c->docs.begin() : c->docs.upper_bound(query.after_id);
  for (; it != c->docs.end() && out.size() < query.limit; ++it) {
    if (query.where) {
      const auto& [field, value] = *query.where;
      const auto& p = it->second.payload;
      if (!p.is_object() || !p.contains(field) || p.at(field) != value) continue;
    }
    out.push_back({it->first, it->second.version, it->second.payload});
  }
  return out;
}

std::size_t DocumentStore::count(std::string_view coll) const {
  {
    std::lock_guard lock(collections_mu_);
    if (!collections_.contains(coll)) return 0;
  }
  auto* c = collection(coll);
  std::shared_lock lock(c->mu);
  return c->docs.size();
}

std::vector<std::string> DocumentStore::collections() const {
  std::lock_guard lock(collections_mu_);
  std::vector<std::string> names;
  for (const auto& [name, _] : collections_) names.push_back(name);
  return names;
}

void DocumentStore::compact_locked(Collection& c) {
  const auto tmp = c.snapshot_path.string() + ".tmp";
  std::FILE* f = std::fopen(tmp.c_str(), "wb");
  if (f == nullptr) throw Error(Errc::io_error, "cannot write snapshot " + tmp);
  std::string buf;
  for (const auto& [id, e] : c.docs) buf += record_line(id, e.version, e.payload);
  try {
    write_all(f, buf, true, tmp);
  } catch (...) {
    std::fclose(f);
    throw;
  }
  std::fclose(f);
  fs::rename(tmp, c.snapshot_path);
  // Replay skips journal records at or below a snapshot version, so a crash
  // before this truncation is harmless.
  std::fclose(c.journal);
  c.journal = std::fopen(c.journal_path.c_str(), "wb");
  if (c.journal == nullptr) throw Error(Errc::io_error, "cannot reset journal " + c.journal_path.string());
  c.journal_records = 0;
}

void DocumentStore::compact() {
  for (const auto& name : collections()) {
    auto* c = collection(name);
    std::unique_lock lock(c->mu);
    compact_locked(*c);
  }
}

std::string DocumentStore::fingerprint() const {
  std::string buf;
  for (const auto& name : collections()) {
    auto* c = collection(name);
    std::shared_lock lock(c->mu);
    if (c->docs.empty()) continue;
    buf += "#" + name + "\n";
    for (const auto& [id, e] : c->docs) buf += record_line(id, e.version, e.payload);
  }
  return sha256_hex(as_bytes(buf));
}

}  // namespace fieldlink::store
