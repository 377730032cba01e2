#include <set>

#include "fieldlink/registry/registry.hpp"
#include "fieldlink/store/collections.hpp"

namespace fieldlink::registry {

namespace cols = store::collections;

std::vector<std::string> check_integrity(const store::DocumentStore& docs, const store::BlobStore& blobs) {
  std::vector<std::string> problems;
  auto complain = [&](std::string_view coll, const std::string& id, const std::string& what) {
    problems.push_back(std::string(coll) + "/" + id + ": " + what);
  };
  auto exists = [&](std::string_view coll, const nlohmann::json& id) {
    return id.is_string() && docs.find(coll, id.get<std::string>()).has_value();
  };
  auto role_of = [&](const nlohmann::json& id) -> std::string {
    if (!id.is_string()) return {};
    const auto u = docs.find(cols::users, id.get<std::string>());
    return u ? u->payload.at("role").get<std::string>() : std::string();
  };
  auto blob_ok = [&](const nlohmann::json& ref) { return ref.is_string() && blobs.contains(ref.get<std::string>()); };

  for (const auto& d : docs.list(cols::usernames)) {
    if (!exists(cols::users, d.payload.at("user_id"))) complain(cols::usernames, d.id, "dangling user");
  }
  for (const auto& d : docs.list(cols::farms)) {
    if (role_of(d.payload.at("farmer_id")) != "farmer") complain(cols::farms, d.id, "owner is not a farmer");
  }
  for (const auto& d : docs.list(cols::crops)) {
    const auto farm = docs.find(cols::farms, d.payload.at("farm_id").get<std::string>());
    if (!farm) {
      complain(cols::crops, d.id, "unknown farm");
    } else if (farm->payload.at("farmer_id") != d.payload.at("farmer_id")) {
      complain(cols::crops, d.id, "farm belongs to a different farmer");
    }
  }
  for (const auto& d : docs.list(cols::samples)) {
    if (!exists(cols::crops, d.payload.at("crop_id"))) complain(cols::samples, d.id, "unknown crop");
    if (!blob_ok(d.payload.at("image_ref"))) complain(cols::samples, d.id, "missing image blob");
  }
  for (const auto& d : docs.list(cols::requests)) {
    const auto& p = d.payload;
    if (!exists(cols::samples, p.at("sample_id"))) complain(cols::requests, d.id, "unknown sample");
    const auto state = p.at("state").get<std::string>();
    const bool processed = state != "submitted";
    if (processed != p.contains("attachments")) complain(cols::requests, d.id, "attachments do not match state");
    if (processed && p.contains("attachments")) {
      for (const char* key : {"tgi_heatmap", "grvi_heatmap"}) {
        if (!blob_ok(p.at("attachments").at(key))) complain(cols::requests, d.id, std::string("missing ") + key);
      }
    }
    const bool assigned = state == "assigned" || state == "diagnosed";
    if (assigned != p.contains("agronomist_id")) complain(cols::requests, d.id, "assignee does not match state");
    if (assigned && role_of(p.at("agronomist_id")) != "agronomist") {
      complain(cols::requests, d.id, "assignee is not an agronomist");
    }
    if ((state == "diagnosed") != docs.find(cols::reports, d.id).has_value()) {
      complain(cols::requests, d.id, "report presence does not match state");
    }
  }
  for (const auto& d : docs.list(cols::reports)) {
    if (!exists(cols::requests, d.payload.at("request_id"))) complain(cols::reports, d.id, "unknown request");
  }
  for (const auto& d : docs.list(cols::listings)) {
    const auto& p = d.payload;
    if (role_of(p.at("farmer_id")) != "farmer") complain(cols::listings, d.id, "seller is not a farmer");
    for (const auto& ref : p.at("photo_refs")) {
      if (!blob_ok(ref)) complain(cols::listings, d.id, "missing photo blob");
    }
    if (p.contains("crop_id") && !p.at("crop_id").is_null() && !exists(cols::crops, p.at("crop_id"))) {
      complain(cols::listings, d.id, "unknown crop");
    }
    const bool sold = p.at("status") == "closed_sold";
    if (sold != docs.find(cols::purchases, d.id).has_value()) {
      complain(cols::listings, d.id, "purchase presence does not match status");
    }
  }
  for (const auto& d : docs.list(cols::offers)) {
    if (!exists(cols::listings, d.payload.at("listing_id"))) complain(cols::offers, d.id, "unknown listing");
    if (role_of(d.payload.at("merchant_id")) != "merchant") complain(cols::offers, d.id, "bidder is not a merchant");
  }
  for (const auto& d : docs.list(cols::purchases)) {
    if (!exists(cols::listings, d.payload.at("listing_id"))) complain(cols::purchases, d.id, "unknown listing");
    if (role_of(d.payload.at("merchant_id")) != "merchant") complain(cols::purchases, d.id, "buyer is not a merchant");
  }
  for (const auto& d : docs.list(cols::threads)) {
    for (const auto& u : d.payload.at("participants")) {
      if (!exists(cols::users, u)) complain(cols::threads, d.id, "unknown participant");
    }
  }
  for (const auto& d : docs.list(cols::messages)) {
    const auto thread = docs.find(cols::threads, d.payload.at("thread_id").get<std::string>());
    if (!thread) {
      complain(cols::messages, d.id, "unknown thread");
      continue;
    }
    const auto& parts = thread->payload.at("participants");
    if (std::find(parts.begin(), parts.end(), d.payload.at("sender_id")) == parts.end()) {
      complain(cols::messages, d.id, "sender is not a participant");
    }
  }
  return problems;
}

}  // namespace fieldlink::registry
