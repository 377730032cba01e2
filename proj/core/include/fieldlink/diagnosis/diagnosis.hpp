#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fieldlink/common/actor.hpp"
#include "fieldlink/common/clock.hpp"
#include "fieldlink/common/events.hpp"
#include "fieldlink/diagnosis/model_slot.hpp"
#include "fieldlink/neuralnet/dataset.hpp"
#include "fieldlink/registry/registry.hpp"
#include "fieldlink/store/blob_store.hpp"
#include "fieldlink/store/document_store.hpp"
#include "fieldlink/vegindex/index.hpp"

namespace fieldlink::diagnosis {

inline constexpr std::string_view kQueueTopic = "diagnosis-queue";
inline constexpr std::string_view kProcessedEvent = "diagnosis.processed";
inline constexpr std::string_view kQueuedEvent = "diagnosis.queued";
inline constexpr std::string_view kAssignedEvent = "diagnosis.assigned";
inline constexpr std::string_view kReportEvent = "diagnosis.report";

enum class RequestState { submitted, processed, assigned, diagnosed };

std::string_view to_string(RequestState s) noexcept;
RequestState parse_request_state(std::string_view text);

struct CnnPrediction {
  std::vector<double> probabilities;
  neuralnet::DiseaseClass top_class;
  std::string model_version;
};

struct Attachments {
  // Absent when the index has no valid pixel (e.g. GRVI on an all-black photo).
  std::optional<vegindex::IndexSummary> tgi;
  std::string tgi_heatmap;
  std::optional<vegindex::IndexSummary> grvi;
  std::string grvi_heatmap;
  CnnPrediction prediction;
};

struct DiagnosisRequest {
  std::string id;
  std::string sample_id;
  std::string farmer_id;
  std::string crop_id;
  std::string image_ref;
  RequestState state = RequestState::submitted;
  Timestamp submitted_at;
  std::optional<Attachments> attachments;
  std::optional<std::string> agronomist_id;
};

struct ReportInput {
  std::string diagnosis;
  std::optional<neuralnet::DiseaseClass> confirmed_class;
  std::string recommendations;
};

struct DiagnosisReport {
  std::string request_id;
  std::string agronomist_id;
  std::string farmer_id;
  std::string diagnosis;
  std::optional<neuralnet::DiseaseClass> confirmed_class;
  std::string recommendations;
  Timestamp filed_at;
};

struct HistoryEntry {
  DiagnosisRequest request;
  DiagnosisReport report;
};

struct HarvestedLabel {
  std::string request_id;
  std::string image_ref;
  std::vector<std::uint8_t> image_bytes;
  neuralnet::DiseaseClass label;
};

nlohmann::json to_json(const CnnPrediction& p);
/// Farmers get the request without the CNN prediction.
nlohmann::json to_json(const DiagnosisRequest& r, Role viewer = Role::agronomist);
nlohmann::json to_json(const DiagnosisReport& r);
ReportInput report_input_from_json(const nlohmann::json& j);

// Sample intake, automated analysis, agronomist claim and report workflow.
//
// Requests move Submitted -> Processed -> Assigned -> Diagnosed; every
// transition is a compare-and-set on the request document.
class DiagnosisService {
 public:
  using EnqueueFn = std::function<void(const std::string& request_id)>;

  DiagnosisService(store::DocumentStore& docs, store::BlobStore& blobs, const registry::Registry& registry,
                   const ModelSlot& models, EventSink& events, const Clock& clock);

  /// Called with each new request id; without one, processing is manual.
  void set_enqueue(EnqueueFn fn);

  /// Throws Forbidden, UnknownCrop, NotOwner, DecodeError. Nothing is
  /// stored unless the image decodes.
  DiagnosisRequest submit_sample(const Actor& farmer, std::string_view crop_id, std::span<const std::uint8_t> image);

  /// Throws NotFound, InvalidState (not Submitted or already being
  /// processed), PipelineError (request stays Submitted).
  DiagnosisRequest process_sample(std::string_view request_id);

  /// Throws Forbidden, NotFound, AlreadyClaimed.
  DiagnosisRequest claim_request(const Actor& agronomist, std::string_view request_id);

  /// Throws Forbidden, NotFound, AlreadyDiagnosed, NotAssignee, MissingField.
  DiagnosisReport file_report(const Actor& agronomist, std::string_view request_id, const ReportInput& input);

  /// Confirmed labels not harvested before; marks them harvested.
  std::vector<HarvestedLabel> harvest_training_labels();

  /// Farmers: own requests. Agronomists: the unclaimed queue plus requests
  /// assigned to them. Oldest first.
  std::vector<DiagnosisRequest> list_requests(const Actor& actor) const;

  /// Diagnosed requests with their reports: a farmer's own, or those an
  /// agronomist diagnosed. Newest first.
  std::vector<HistoryEntry> history(const Actor& actor) const;

  /// Throws NotFound; Forbidden when the actor may not see it.
  DiagnosisRequest request(const Actor& actor, std::string_view request_id) const;
  std::optional<DiagnosisReport> report(const Actor& actor, std::string_view request_id) const;

  /// Unscoped read for workers and tools. Throws NotFound.
  DiagnosisRequest request(std::string_view request_id) const;
  /// Ids of every request still Submitted.
  std::vector<std::string> pending_requests() const;

 private:
  Attachments analyse(const DiagnosisRequest& request) const;

  store::DocumentStore& docs_;
  store::BlobStore& blobs_;
  const registry::Registry& registry_;
  const ModelSlot& models_;
  EventSink& events_;
  const Clock& clock_;
  EnqueueFn enqueue_;
  std::mutex in_flight_mu_;
  std::set<std::string, std::less<>> in_flight_;
};

}  // namespace fieldlink::diagnosis
