#include "fieldlink/diagnosis/diagnosis.hpp"

#include <algorithm>

#include "fieldlink/common/crypto.hpp"
#include "fieldlink/common/error.hpp"
#include "fieldlink/store/collections.hpp"
#include "fieldlink/vegindex/heatmap.hpp"
#include "fieldlink/vegindex/image.hpp"

namespace fieldlink::diagnosis {

namespace cols = store::collections;
namespace nn = neuralnet;
using nlohmann::json;

namespace {

json summary_json(const std::optional<vegindex::IndexSummary>& s) { return s ? vegindex::to_json(*s) : json(); }

std::optional<vegindex::IndexSummary> summary_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return vegindex::summary_from_json(j);
}

nn::DiseaseClass class_from(const json& j) {
  const auto name = j.get<std::string>();
  const auto c = nn::parse_class(name);
  if (!c) throw Error(Errc::invalid_argument, "unknown class label '" + name + "'");
  return *c;
}

json attachments_json(const Attachments& a) {
  return {{"tgi", summary_json(a.tgi)},
          {"tgi_heatmap", a.tgi_heatmap},
          {"grvi", summary_json(a.grvi)},
          {"grvi_heatmap", a.grvi_heatmap},
          {"prediction", to_json(a.prediction)}};
}

Attachments attachments_from(const json& j) {
  const auto& p = j.at("prediction");
  return {summary_from(j.at("tgi")),
          j.at("tgi_heatmap").get<std::string>(),
          summary_from(j.at("grvi")),
          j.at("grvi_heatmap").get<std::string>(),
          {p.at("probabilities").get<std::vector<double>>(), class_from(p.at("top_class")),
           p.at("model_version").get<std::string>()}};
}

json request_payload(const DiagnosisRequest& r) {
  json j = {{"sample_id", r.sample_id},
            {"farmer_id", r.farmer_id},
            {"crop_id", r.crop_id},
            {"image_ref", r.image_ref},
            {"state", to_string(r.state)},
            {"submitted_at", to_epoch_ms(r.submitted_at)}};
  if (r.attachments) j["attachments"] = attachments_json(*r.attachments);
  if (r.agronomist_id) j["agronomist_id"] = *r.agronomist_id;
  return j;
}

DiagnosisRequest request_from(const store::Document& doc) {
  const auto& p = doc.payload;
  DiagnosisRequest r;
  r.id = doc.id;
  r.sample_id = p.at("sample_id").get<std::string>();
  r.farmer_id = p.at("farmer_id").get<std::string>();
  r.crop_id = p.at("crop_id").get<std::string>();
  r.image_ref = p.at("image_ref").get<std::string>();
  r.state = parse_request_state(p.at("state").get<std::string>());
  r.submitted_at = from_epoch_ms(p.at("submitted_at").get<std::int64_t>());
  if (p.contains("attachments")) r.attachments = attachments_from(p.at("attachments"));
  if (p.contains("agronomist_id")) r.agronomist_id = p.at("agronomist_id").get<std::string>();
  return r;
}

json report_payload(const DiagnosisReport& r) {
  auto j = to_json(r);
  j["harvested"] = false;
  return j;
}

DiagnosisReport report_from(const json& p) {
  DiagnosisReport r;
  r.request_id = p.at("request_id").get<std::string>();
  r.agronomist_id = p.at("agronomist_id").get<std::string>();
  r.farmer_id = p.at("farmer_id").get<std::string>();
  r.diagnosis = p.at("diagnosis").get<std::string>();
  if (p.contains("confirmed_class") && !p.at("confirmed_class").is_null()) {
    r.confirmed_class = class_from(p.at("confirmed_class"));
  }
  r.recommendations = p.at("recommendations").get<std::string>();
  r.filed_at = from_epoch_ms(p.at("filed_at").get<std::int64_t>());
  return r;
}

std::optional<vegindex::IndexSummary> summarize_or_empty(const vegindex::IndexMap& map) {
  try {
    return vegindex::summarize_index(map);
  } catch (const Error& e) {
    if (e.code() != Errc::empty_mask) throw;
    return std::nullopt;
  }
}

// A map without valid pixels is drawn entirely in the masked colour.
std::vector<std::uint8_t> heatmap_or_masked(const vegindex::IndexMap& map, bool has_valid) {
  if (has_valid) return vegindex::render_heatmap(map);
  vegindex::RgbImage img(map.width, map.height);
  const auto& c = vegindex::kMaskedColor;
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) img.set(x, y, c[0], c[1], c[2]);
  }
  return vegindex::encode_png(img);
}

}  // namespace

std::string_view to_string(RequestState s) noexcept {
  switch (s) {
    case RequestState::submitted: return "submitted";
    case RequestState::processed: return "processed";
    case RequestState::assigned: return "assigned";
    case RequestState::diagnosed: return "diagnosed";
  }
  return "submitted";
}

RequestState parse_request_state(std::string_view text) {
  if (text == "submitted") return RequestState::submitted;
  if (text == "processed") return RequestState::processed;
  if (text == "assigned") return RequestState::assigned;
  if (text == "diagnosed") return RequestState::diagnosed;
  throw Error(Errc::invalid_argument, "unknown request state '" + std::string(text) + "'");
}

json to_json(const CnnPrediction& p) {
  return {{"probabilities", p.probabilities},
          {"top_class", nn::class_name(p.top_class)},
          {"model_version", p.model_version}};
}

json to_json(const DiagnosisRequest& r, Role viewer) {
  auto j = request_payload(r);
  j["id"] = r.id;
  if (viewer == Role::farmer && j.contains("attachments")) j["attachments"].erase("prediction");
  return j;
}

json to_json(const DiagnosisReport& r) {
  return {{"request_id", r.request_id},
          {"agronomist_id", r.agronomist_id},
          {"farmer_id", r.farmer_id},
          {"diagnosis", r.diagnosis},
          {"confirmed_class", r.confirmed_class ? json(nn::class_name(*r.confirmed_class)) : json()},
          {"recommendations", r.recommendations},
          {"filed_at", to_epoch_ms(r.filed_at)}};
}

ReportInput report_input_from_json(const json& j) {
  ReportInput in;
  in.diagnosis = j.value("diagnosis", "");
  in.recommendations = j.value("recommendations", "");
  if (j.contains("confirmed_class") && !j.at("confirmed_class").is_null()) {
    in.confirmed_class = class_from(j.at("confirmed_class"));
  }
  return in;
}

DiagnosisService::DiagnosisService(store::DocumentStore& docs, store::BlobStore& blobs,
                                   const registry::Registry& registry, const ModelSlot& models, EventSink& events,
                                   const Clock& clock)
    : docs_(docs), blobs_(blobs), registry_(registry), models_(models), events_(events), clock_(clock) {}

void DiagnosisService::set_enqueue(EnqueueFn fn) { enqueue_ = std::move(fn); }

DiagnosisRequest DiagnosisService::submit_sample(const Actor& farmer, std::string_view crop_id,
                                                 std::span<const std::uint8_t> image) {
  if (farmer.role != Role::farmer) throw Error(Errc::forbidden, "only farmers submit samples");
  const auto crop = registry_.crop(crop_id);
  if (crop.farmer_id != farmer.user_id) throw Error(Errc::not_owner, "crop " + crop.id + " belongs to another farmer");
  vegindex::decode_rgb(image);

  const auto now = clock_.now();
  const auto image_ref = blobs_.put(image);
  const auto sample_id = new_id("smp");
  docs_.put_cas(cols::samples, sample_id, 0,
                {{"farmer_id", farmer.user_id},
                 {"crop_id", crop.id},
                 {"image_ref", image_ref},
                 {"submitted_at", to_epoch_ms(now)}});
  DiagnosisRequest r;
  r.id = new_id("req");
  r.sample_id = sample_id;
  r.farmer_id = farmer.user_id;
  r.crop_id = crop.id;
  r.image_ref = image_ref;
  r.submitted_at = now;
  docs_.put_cas(cols::requests, r.id, 0, request_payload(r));
  if (enqueue_) enqueue_(r.id);
  return r;
}

Attachments DiagnosisService::analyse(const DiagnosisRequest& request) const {
  const auto image = vegindex::decode_rgb(blobs_.get(request.image_ref));
  const auto refl = vegindex::to_reflectance(image);
  const auto tgi = vegindex::compute_index(refl, vegindex::IndexKind::tgi);
  const auto grvi = vegindex::compute_index(refl, vegindex::IndexKind::grvi);

  const auto slot = models_.current();
  const auto prediction = nn::predict(*slot.model, nn::image_to_tensor(image, slot.model->input_shape()));

  Attachments a;
  a.tgi = summarize_or_empty(tgi);
  a.tgi_heatmap = blobs_.put(heatmap_or_masked(tgi, a.tgi.has_value()));
  a.grvi = summarize_or_empty(grvi);
  a.grvi_heatmap = blobs_.put(heatmap_or_masked(grvi, a.grvi.has_value()));
  a.prediction = {prediction.probabilities, nn::kAllClasses.at(prediction.top_index), slot.version};
  return a;
}

DiagnosisRequest DiagnosisService::process_sample(std::string_view request_id) {
  {
    std::lock_guard lock(in_flight_mu_);
    if (!in_flight_.emplace(request_id).second) {
      throw Error(Errc::invalid_state, "request " + std::string(request_id) + " is already being processed");
    }
  }
  struct Release {
    DiagnosisService* self;
    std::string id;
    ~Release() {
      std::lock_guard lock(self->in_flight_mu_);
      self->in_flight_.erase(id);
    }
  } release{this, std::string(request_id)};

  const auto doc = docs_.get(cols::requests, request_id);
  auto r = request_from(doc);
  if (r.state != RequestState::submitted) {
    throw Error(Errc::invalid_state, "request " + r.id + " is " + std::string(to_string(r.state)),
                {{"state", to_string(r.state)}});
  }
  try {
    r.attachments = analyse(r);
  } catch (const std::exception& e) {
    throw Error(Errc::pipeline_error, std::string("processing failed: ") + e.what());
  }
  r.state = RequestState::processed;
  try {
    docs_.put_cas(cols::requests, r.id, doc.version, request_payload(r));
  } catch (const Error& e) {
    if (e.code() != Errc::version_conflict) throw;
    throw Error(Errc::invalid_state, "request " + r.id + " changed during processing");
  }
  events_.publish({std::string(kProcessedEvent), r.id, {r.farmer_id}, to_json(r, Role::farmer)});
  events_.publish({std::string(kQueuedEvent), std::string(kQueueTopic), {}, to_json(r, Role::agronomist)});
  return r;
}

DiagnosisRequest DiagnosisService::claim_request(const Actor& agronomist, std::string_view request_id) {
  if (agronomist.role != Role::agronomist) throw Error(Errc::forbidden, "only agronomists claim requests");
  for (;;) {
    const auto doc = docs_.get(cols::requests, request_id);
    auto r = request_from(doc);
    if (r.state != RequestState::processed) {
      json details = {{"state", to_string(r.state)}};
      if (r.agronomist_id) details["agronomist_id"] = *r.agronomist_id;
      throw Error(Errc::already_claimed, "request " + r.id + " is not open for claiming", std::move(details));
    }
    r.state = RequestState::assigned;
    r.agronomist_id = agronomist.user_id;
    try {
      docs_.put_cas(cols::requests, r.id, doc.version, request_payload(r));
    } catch (const Error& e) {
      if (e.code() != Errc::version_conflict) throw;
      continue;  // re-read; the winner's state makes the next pass throw
    }
    events_.publish({std::string(kAssignedEvent), std::string(kQueueTopic), {},
                     {{"request_id", r.id}, {"agronomist_id", agronomist.user_id}}});
    return r;
  }
}

DiagnosisReport DiagnosisService::file_report(const Actor& agronomist, std::string_view request_id,
                                              const ReportInput& input) {
  if (agronomist.role != Role::agronomist) throw Error(Errc::forbidden, "only agronomists file reports");
  const auto doc = docs_.get(cols::requests, request_id);
  auto r = request_from(doc);
  if (r.state == RequestState::diagnosed) throw Error(Errc::already_diagnosed, "request " + r.id + " already has a report");
  if (r.state != RequestState::assigned || r.agronomist_id != agronomist.user_id) {
    throw Error(Errc::not_assignee, "request " + r.id + " is not assigned to you");
  }
  if (input.diagnosis.empty()) throw Error(Errc::missing_field, "diagnosis must not be empty");

  DiagnosisReport report{r.id,         agronomist.user_id,    r.farmer_id, input.diagnosis,
                         input.confirmed_class, input.recommendations, clock_.now()};
  try {
    docs_.put_cas(cols::reports, r.id, 0, report_payload(report));
  } catch (const Error& e) {
    if (e.code() != Errc::version_conflict) throw;
    throw Error(Errc::already_diagnosed, "request " + r.id + " already has a report");
  }
  r.state = RequestState::diagnosed;
  // The report document is the exclusive claim; the request only follows it.
  store::update_with_retry(docs_, cols::requests, r.id, [&](json p) {
    p["state"] = to_string(RequestState::diagnosed);
    return p;
  });
  events_.publish({std::string(kReportEvent), r.id, {r.farmer_id}, to_json(report)});
  return report;
}

std::vector<HarvestedLabel> DiagnosisService::harvest_training_labels() {
  std::vector<HarvestedLabel> out;
  for (const auto& doc : docs_.list(cols::reports, store::ListQuery::matching("harvested", false))) {
    const auto report = report_from(doc.payload);
    if (!report.confirmed_class) continue;
    auto marked = doc.payload;
    marked["harvested"] = true;
    try {
      docs_.put_cas(cols::reports, doc.id, doc.version, std::move(marked));
    } catch (const Error& e) {
      if (e.code() != Errc::version_conflict) throw;
      continue;  // a concurrent harvest took it
    }
    const auto r = request(report.request_id);
    out.push_back({r.id, r.image_ref, blobs_.get(r.image_ref), *report.confirmed_class});
  }
  return out;
}

std::vector<DiagnosisRequest> DiagnosisService::list_requests(const Actor& actor) const {
  std::vector<DiagnosisRequest> out;
  if (actor.role == Role::farmer) {
    for (const auto& doc :
         docs_.list(cols::requests, store::ListQuery::matching("farmer_id", actor.user_id))) {
      out.push_back(request_from(doc));
    }
  } else if (actor.role == Role::agronomist) {
    for (const auto& doc : docs_.list(cols::requests)) {
      const auto state = doc.payload.at("state").get<std::string>();
      const bool queued = state == "processed";
      const bool mine = state == "assigned" && doc.payload.at("agronomist_id") == actor.user_id;
      if (queued || mine) out.push_back(request_from(doc));
    }
  } else {
    throw Error(Errc::forbidden, "merchants have no diagnosis requests");
  }
  std::stable_sort(out.begin(), out.end(), [](const DiagnosisRequest& a, const DiagnosisRequest& b) {
    return a.submitted_at < b.submitted_at;
  });
  return out;
}

std::vector<HistoryEntry> DiagnosisService::history(const Actor& actor) const {
  std::string field;
  if (actor.role == Role::farmer) field = "farmer_id";
  if (actor.role == Role::agronomist) field = "agronomist_id";
  if (field.empty()) throw Error(Errc::forbidden, "merchants have no diagnosis history");
  std::vector<HistoryEntry> out;
  for (const auto& doc : docs_.list(cols::reports, store::ListQuery::matching(field, json(actor.user_id)))) {
    out.push_back({request(doc.id), report_from(doc.payload)});
  }
  std::stable_sort(out.begin(), out.end(), [](const HistoryEntry& a, const HistoryEntry& b) {
    return a.report.filed_at > b.report.filed_at;
  });
  return out;
}

DiagnosisRequest DiagnosisService::request(std::string_view request_id) const {
  return request_from(docs_.get(cols::requests, request_id));
}

DiagnosisRequest DiagnosisService::request(const Actor& actor, std::string_view request_id) const {
  auto r = request(request_id);
  const bool visible = (actor.role == Role::farmer && r.farmer_id == actor.user_id) || actor.role == Role::agronomist;
  if (!visible) throw Error(Errc::forbidden, "request " + r.id + " is not visible to you");
  return r;
}

std::optional<DiagnosisReport> DiagnosisService::report(const Actor& actor, std::string_view request_id) const {
  request(actor, request_id);
  const auto doc = docs_.find(cols::reports, request_id);
  if (!doc) return std::nullopt;
  return report_from(doc->payload);
}

std::vector<std::string> DiagnosisService::pending_requests() const {
  std::vector<std::string> ids;
  for (const auto& doc :
       docs_.list(cols::requests, store::ListQuery::matching("state", to_string(RequestState::submitted)))) {
    ids.push_back(doc.id);
  }
  return ids;
}

}  // namespace fieldlink::diagnosis
