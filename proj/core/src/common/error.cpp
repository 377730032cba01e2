#include "fieldlink/common/error.hpp"

namespace fieldlink {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::decode_error: return "DecodeError";
    case Errc::empty_mask: return "EmptyMask";
    case Errc::spec_error: return "SpecError";
    case Errc::shape_error: return "ShapeError";
    case Errc::format_error: return "FormatError";
    case Errc::degenerate_dataset: return "DegenerateDataset";
    case Errc::io_error: return "IoError";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::weak_secret: return "WeakSecret";
    case Errc::duplicate_name: return "DuplicateName";
    case Errc::bad_credentials: return "BadCredentials";
    case Errc::unauthenticated: return "Unauthenticated";
    case Errc::forbidden: return "Forbidden";
    case Errc::not_owner: return "NotOwner";
    case Errc::unknown_user: return "UnknownUser";
    case Errc::unknown_farm: return "UnknownFarm";
    case Errc::unknown_crop: return "UnknownCrop";
    case Errc::version_conflict: return "VersionConflict";
    case Errc::not_found: return "NotFound";
    case Errc::pipeline_error: return "PipelineError";
    case Errc::invalid_state: return "InvalidState";
    case Errc::already_claimed: return "AlreadyClaimed";
    case Errc::not_assignee: return "NotAssignee";
    case Errc::already_diagnosed: return "AlreadyDiagnosed";
    case Errc::past_deadline: return "PastDeadline";
    case Errc::missing_field: return "MissingField";
    case Errc::auction_closed: return "AuctionClosed";
    case Errc::bid_too_low: return "BidTooLow";
    case Errc::not_yet_ended: return "NotYetEnded";
    case Errc::already_closed: return "AlreadyClosed";
    case Errc::self_thread: return "SelfThread";
    case Errc::not_participant: return "NotParticipant";
    case Errc::empty_body: return "EmptyBody";
    case Errc::too_long: return "TooLong";
    case Errc::too_few_points: return "TooFewPoints";
    case Errc::bad_span: return "BadSpan";
    case Errc::rate_limited: return "RateLimited";
  }
  return "Unknown";
}

}  // namespace fieldlink
