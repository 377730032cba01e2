#include "fieldlink/gateway/api.hpp"

#include <charconv>
#include <functional>
#include <limits>

#include "fieldlink/analytics/loess.hpp"
#include "fieldlink/analytics/usage.hpp"
#include "fieldlink/common/crypto.hpp"
#include "fieldlink/store/collections.hpp"
#include "fieldlink/vegindex/image.hpp"

namespace fieldlink::gateway {

using nlohmann::json;

namespace {

struct Context {
  const ApiRequest& request;
  std::vector<std::string> params;
  std::optional<Actor> actor;

  const Actor& who() const { return *actor; }
};

using Handler = std::function<ApiResponse(Context&)>;

ApiResponse json_response(int status, const json& body) { return {status, "application/json", body.dump()}; }

ApiResponse error_response(int status, std::string_view code, const std::string& message, const json& details = {}) {
  json err = {{"code", code}, {"message", message}};
  err["details"] = details.is_null() ? json::object() : details;
  return json_response(status, {{"error", err}});
}

json items(json array) { return {{"items", std::move(array)}}; }

json body_json(const ApiRequest& r) {
  if (r.body.empty()) return json::object();
  auto j = json::parse(r.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::invalid_argument, "request body must be a JSON object");
  return j;
}

std::string required_string(const json& body, const char* key) {
  if (!body.contains(key) || !body.at(key).is_string()) {
    throw Error(Errc::missing_field, std::string("'") + key + "' (string) is required");
  }
  return body.at(key).get<std::string>();
}

std::string optional_string(const json& body, const char* key) {
  if (!body.contains(key) || body.at(key).is_null()) return {};
  if (!body.at(key).is_string()) throw Error(Errc::invalid_argument, std::string("'") + key + "' must be a string");
  return body.at(key).get<std::string>();
}

template <class T>
T query_number(const ApiRequest& r, const std::string& key, T fallback) {
  const auto it = r.query.find(key);
  if (it == r.query.end() || it->second.empty()) return fallback;
  T value{};
  const auto* first = it->second.data();
  const auto* last = first + it->second.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw Error(Errc::invalid_argument, "query parameter '" + key + "' is not a number");
  return value;
}

std::string query_string(const ApiRequest& r, const std::string& key) {
  const auto it = r.query.find(key);
  return it == r.query.end() ? std::string() : it->second;
}

std::string_view sniff_content_type(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N' && bytes[3] == 'G') return "image/png";
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) return "image/jpeg";
  return "application/octet-stream";
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto slash = path.find('/', start);
    const auto end = slash == std::string_view::npos ? path.size() : slash;
    if (end > start) out.emplace_back(path.substr(start, end - start));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return out;
}

}  // namespace

struct Api::Route {
  std::string method;
  std::vector<std::string> pattern;  // "{}" matches one segment
  std::optional<Endpoint> endpoint;  // empty for the public auth routes
  Handler handler;
};

void parse_target(std::string_view target, std::string& path, std::map<std::string, std::string>& query) {
  const auto q = target.find('?');
  path = percent_decode(target.substr(0, q));
  query.clear();
  if (q == std::string_view::npos) return;
  auto rest = target.substr(q + 1);
  while (!rest.empty()) {
    const auto amp = rest.find('&');
    const auto pair = rest.substr(0, amp);
    const auto eq = pair.find('=');
    if (!pair.empty()) {
      query[percent_decode(pair.substr(0, eq))] = eq == std::string_view::npos ? "" : percent_decode(pair.substr(eq + 1));
    }
    if (amp == std::string_view::npos) break;
    rest.remove_prefix(amp + 1);
  }
}

std::string percent_decode(std::string_view s) {
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size() && hex(s[i + 1]) >= 0 && hex(s[i + 2]) >= 0) {
      out.push_back(static_cast<char>(hex(s[i + 1]) * 16 + hex(s[i + 2])));
      i += 2;
    } else if (s[i] == '+') {
      out.push_back(' ');
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

std::string bearer_token(std::string_view authorization) {
  constexpr std::string_view prefix = "Bearer ";
  if (!authorization.starts_with(prefix)) return {};
  return std::string(authorization.substr(prefix.size()));
}

int http_status(Errc code) noexcept {
  switch (code) {
    case Errc::unauthenticated:
    case Errc::bad_credentials: return 401;
    case Errc::forbidden:
    case Errc::not_owner:
    case Errc::not_participant:
    case Errc::not_assignee: return 403;
    case Errc::not_found:
    case Errc::unknown_user:
    case Errc::unknown_farm:
    case Errc::unknown_crop: return 404;
    case Errc::version_conflict:
    case Errc::duplicate_name:
    case Errc::invalid_state:
    case Errc::already_claimed:
    case Errc::already_diagnosed:
    case Errc::auction_closed:
    case Errc::bid_too_low:
    case Errc::not_yet_ended:
    case Errc::already_closed: return 409;
    case Errc::decode_error:
    case Errc::empty_mask:
    case Errc::invalid_argument:
    case Errc::weak_secret:
    case Errc::missing_field:
    case Errc::past_deadline:
    case Errc::self_thread:
    case Errc::empty_body:
    case Errc::too_long:
    case Errc::too_few_points:
    case Errc::bad_span:
    case Errc::spec_error:
    case Errc::shape_error:
    case Errc::degenerate_dataset: return 422;
    case Errc::rate_limited: return 429;
    case Errc::format_error:
    case Errc::io_error:
    case Errc::pipeline_error: return 500;
  }
  return 500;
}

Actor Api::authenticate(std::string_view token, Endpoint endpoint) {
  const auto actor = platform_.registry().resolve_token(token);
  {
    std::lock_guard lock(usage_mu_);
    auto& n = requests_per_session_[sha256_hex(as_bytes(token))];
    if (++n > platform_.config().session_request_cap) {
      throw Error(Errc::rate_limited, "session request cap reached",
                  {{"cap", platform_.config().session_request_cap}});
    }
  }
  if (!authorize(actor.role, endpoint)) {
    throw Error(Errc::forbidden, std::string(to_string(actor.role)) + " may not call " + std::string(to_string(endpoint)),
                {{"endpoint", to_string(endpoint)}, {"role", to_string(actor.role)}});
  }
  return actor;
}

Api::Api(Platform& platform) : platform_(platform) {
  auto& p = platform_;
  auto add = [this](std::string method, std::string_view path, std::optional<Endpoint> endpoint, Handler h) {
    routes_.push_back({std::move(method), split_path(path), endpoint, std::move(h)});
  };

  // --- accounts -----------------------------------------------------------
  add("POST", "/auth/register", std::nullopt, [&p](Context& c) {
    const auto body = body_json(c.request);
    const auto role = parse_role(required_string(body, "role"));
    if (!role) throw Error(Errc::invalid_argument, "role must be farmer, agronomist or merchant");
    registry::Contact contact;
    const auto src = body.contains("contact") && body.at("contact").is_object() ? body.at("contact") : body;
    contact.phone = optional_string(src, "phone");
    contact.locality = optional_string(src, "locality");
    const auto [user, session] =
        p.registry().register_user(required_string(body, "name"), *role, contact, required_string(body, "secret"));
    return json_response(201, {{"user", registry::to_json(user)},
                               {"token", session.token},
                               {"expires_at", to_epoch_ms(session.expires_at)}});
  });
  add("POST", "/auth/login", std::nullopt, [&p](Context& c) {
    const auto body = body_json(c.request);
    const auto session = p.registry().authenticate(required_string(body, "name"), required_string(body, "secret"));
    return json_response(200, {{"token", session.token},
                               {"user_id", session.user_id},
                               {"role", to_string(session.role)},
                               {"expires_at", to_epoch_ms(session.expires_at)}});
  });
  add("GET", "/me", Endpoint::me, [&p](Context& c) {
    return json_response(200, registry::to_json(p.registry().user(c.who().user_id)));
  });
  add("GET", "/users", Endpoint::list_users, [&p](Context& c) {
    const auto role_filter = query_string(c.request, "role");
    json out = json::array();
    for (const auto& doc : p.docs().list(store::collections::users)) {
      const auto role = doc.payload.at("role").get<std::string>();
      if (!role_filter.empty() && role != role_filter) continue;
      out.push_back({{"id", doc.id},
                     {"name", doc.payload.at("name")},
                     {"role", role},
                     {"locality", doc.payload.at("contact").at("locality")}});
    }
    return json_response(200, items(std::move(out)));
  });

  // --- production registry ------------------------------------------------
  add("POST", "/farms", Endpoint::create_farm, [&p](Context& c) {
    const auto body = body_json(c.request);
    const auto farm = p.registry().create_farm(c.who(), {required_string(body, "name"), optional_string(body, "locality")});
    return json_response(201, registry::to_json(farm));
  });
  add("GET", "/farms", Endpoint::list_farms, [&p](Context& c) {
    json out = json::array();
    for (const auto& f : p.registry().farms_of(c.who().user_id)) out.push_back(registry::to_json(f));
    return json_response(200, items(std::move(out)));
  });
  add("POST", "/farms/{}/crops", Endpoint::create_crop, [&p](Context& c) {
    const auto body = body_json(c.request);
    const auto crop = p.registry().create_crop(
        c.who(), c.params[0],
        {required_string(body, "kind"), optional_string(body, "planted_at"), optional_string(body, "notes")});
    return json_response(201, registry::to_json(crop));
  });
  add("GET", "/crops", Endpoint::list_crops, [&p](Context& c) {
    json out = json::array();
    for (const auto& crop : p.registry().crops_of(c.who().user_id)) out.push_back(registry::to_json(crop));
    return json_response(200, items(std::move(out)));
  });

  // --- blobs --------------------------------------------------------------
  add("POST", "/blobs", Endpoint::upload_blob, [&p](Context& c) {
    const auto bytes = as_bytes(c.request.body);
    vegindex::decode_rgb(bytes);  // only images are accepted
    return json_response(201, {{"digest", p.blobs().put(bytes)}});
  });
  add("GET", "/blobs/{}", Endpoint::get_blob, [&p](Context& c) {
    const auto bytes = p.blobs().get(c.params[0]);
    return ApiResponse{200, std::string(sniff_content_type(bytes)), std::string(bytes.begin(), bytes.end())};
  });

  // --- diagnosis ----------------------------------------------------------
  add("POST", "/diagnosis/samples", Endpoint::submit_sample, [&p](Context& c) {
    std::string crop_id;
    Bytes image;
    if (c.request.content_type.starts_with("application/json")) {
      const auto body = body_json(c.request);
      crop_id = required_string(body, "crop_id");
      image = base64_decode(required_string(body, "image_base64"));
    } else {
      crop_id = query_string(c.request, "crop_id");
      if (crop_id.empty()) throw Error(Errc::missing_field, "crop_id query parameter is required");
      image.assign(c.request.body.begin(), c.request.body.end());
    }
    const auto r = p.diagnosis().submit_sample(c.who(), crop_id, image);
    return json_response(201, diagnosis::to_json(r, c.who().role));
  });
  add("GET", "/diagnosis/requests", Endpoint::list_requests, [&p](Context& c) {
    const auto state = query_string(c.request, "state");
    if (!state.empty()) diagnosis::parse_request_state(state);
    json out = json::array();
    for (const auto& r : p.diagnosis().list_requests(c.who())) {
      if (!state.empty() && diagnosis::to_string(r.state) != state) continue;
      out.push_back(diagnosis::to_json(r, c.who().role));
    }
    return json_response(200, items(std::move(out)));
  });
  add("GET", "/diagnosis/requests/{}", Endpoint::get_request, [&p](Context& c) {
    const auto r = p.diagnosis().request(c.who(), c.params[0]);
    auto body = diagnosis::to_json(r, c.who().role);
    const auto report = p.diagnosis().report(c.who(), c.params[0]);
    body["report"] = report ? diagnosis::to_json(*report) : json();
    return json_response(200, body);
  });
  add("POST", "/diagnosis/requests/{}/claim", Endpoint::claim_request, [&p](Context& c) {
    return json_response(200, diagnosis::to_json(p.diagnosis().claim_request(c.who(), c.params[0]), c.who().role));
  });
  add("POST", "/diagnosis/requests/{}/report", Endpoint::file_report, [&p](Context& c) {
    const auto input = diagnosis::report_input_from_json(body_json(c.request));
    return json_response(201, diagnosis::to_json(p.diagnosis().file_report(c.who(), c.params[0], input)));
  });
  add("GET", "/diagnosis/history", Endpoint::diagnosis_history, [&p](Context& c) {
    json out = json::array();
    for (const auto& h : p.diagnosis().history(c.who())) {
      out.push_back({{"request", diagnosis::to_json(h.request, c.who().role)}, {"report", diagnosis::to_json(h.report)}});
    }
    return json_response(200, items(std::move(out)));
  });

  // --- marketplace --------------------------------------------------------
  add("POST", "/market/listings", Endpoint::publish_listing, [&p](Context& c) {
    const auto details = marketplace::details_from_json(body_json(c.request));
    return json_response(201, marketplace::to_json(p.market().publish_listing(c.who(), details)));
  });
  add("GET", "/market/listings", Endpoint::list_listings, [&p](Context& c) {
    const auto status = query_string(c.request, "status");
    if (!status.empty()) marketplace::parse_listing_status(status);
    if (c.who().role == Role::farmer) {
      json out = json::array();
      for (const auto& l : p.market().listings_of(c.who().user_id)) {
        if (!status.empty() && marketplace::to_string(l.status) != status) continue;
        out.push_back(marketplace::to_json(l));
      }
      return json_response(200, items(std::move(out)));
    }
    if (!status.empty() && status != "open") {
      throw Error(Errc::invalid_argument, "merchants browse open listings only");
    }
    marketplace::OnsaleQuery q;
    q.text = query_string(c.request, "q");
    q.cursor = query_string(c.request, "cursor");
    q.limit = query_number<std::size_t>(c.request, "limit", 50);
    const auto page = p.market().list_onsale(c.who(), q);
    json out = json::array();
    for (const auto& l : page.items) out.push_back(marketplace::to_json(l));
    auto body = items(std::move(out));
    body["next_cursor"] = page.next_cursor.empty() ? json() : json(page.next_cursor);
    return json_response(200, body);
  });
  add("GET", "/market/listings/{}", Endpoint::get_listing, [&p](Context& c) {
    const auto l = p.market().listing(c.params[0]);
    if (c.who().role == Role::farmer && l.farmer_id != c.who().user_id) {
      throw Error(Errc::forbidden, "listing " + l.id + " belongs to another farmer");
    }
    return json_response(200, marketplace::to_json(l));
  });
  add("GET", "/market/listings/{}/offers", Endpoint::listing_offers, [&p](Context& c) {
    const auto l = p.market().listing(c.params[0]);
    if (c.who().role == Role::farmer && l.farmer_id != c.who().user_id) {
      throw Error(Errc::forbidden, "listing " + l.id + " belongs to another farmer");
    }
    json out = json::array();
    for (const auto& o : p.market().offers_for(l.id)) out.push_back(marketplace::to_json(o));
    return json_response(200, items(std::move(out)));
  });
  add("POST", "/market/listings/{}/offers", Endpoint::place_offer, [&p](Context& c) {
    const auto body = body_json(c.request);
    if (!body.contains("amount") || !body.at("amount").is_number_integer()) {
      throw Error(Errc::missing_field, "'amount' (integer minor units) is required");
    }
    const auto offer = p.market().place_offer(c.who(), c.params[0], body.at("amount").get<marketplace::Money>());
    return json_response(201, marketplace::to_json(offer));
  });
  add("GET", "/market/offers", Endpoint::list_offers, [&p](Context& c) {
    json out = json::array();
    for (const auto& o : p.market().offers_by(c.who().user_id)) out.push_back(marketplace::to_json(o));
    return json_response(200, items(std::move(out)));
  });
  add("GET", "/market/purchases", Endpoint::list_purchases, [&p](Context& c) {
    json out = json::array();
    for (const auto& purchase : p.market().purchase_history(c.who())) out.push_back(marketplace::to_json(purchase));
    return json_response(200, items(std::move(out)));
  });

  // --- chat ---------------------------------------------------------------
  add("POST", "/chat/threads", Endpoint::open_thread, [&p](Context& c) {
    const auto body = body_json(c.request);
    return json_response(200, chat::to_json(p.chat().open_thread(c.who(), required_string(body, "user_id"))));
  });
  add("GET", "/chat/threads", Endpoint::list_threads, [&p](Context& c) {
    json out = json::array();
    for (const auto& s : p.chat().threads_of(c.who())) out.push_back(chat::to_json(s));
    return json_response(200, items(std::move(out)));
  });
  add("POST", "/chat/threads/{}/messages", Endpoint::send_message, [&p](Context& c) {
    const auto body = body_json(c.request);
    return json_response(201, chat::to_json(p.chat().send_message(c.who(), c.params[0], optional_string(body, "body"))));
  });
  add("GET", "/chat/threads/{}/messages", Endpoint::fetch_messages, [&p](Context& c) {
    const auto after = query_number<std::uint64_t>(c.request, "after", 0);
    const auto limit = query_number<std::size_t>(c.request, "limit", std::numeric_limits<std::size_t>::max());
    json out = json::array();
    for (const auto& m : p.chat().fetch_history(c.who(), c.params[0], after, limit)) out.push_back(chat::to_json(m));
    return json_response(200, items(std::move(out)));
  });

  // --- analytics ----------------------------------------------------------
  add("GET", "/analytics/usage", Endpoint::usage_stats, [&p](Context&) {
    return json_response(200, analytics::to_json(analytics::compute_usage_stats(p.docs())));
  });
  add("GET", "/analytics/downloads/trend", Endpoint::download_trend, [&p](Context& c) {
    const auto span = query_number<double>(c.request, "span", p.config().loess_span);
    const auto degree = query_number<int>(c.request, "degree", p.config().loess_degree);
    const auto series = analytics::download_series(p.docs());
    if (degree != 1 && degree != 2) throw Error(Errc::invalid_argument, "degree must be 1 or 2");
    if (!(span > 0.0 && span <= 1.0)) throw Error(Errc::bad_span, "span must lie in (0, 1]", {{"span", span}});
    // Too short a series is not an error here: the trend is just absent.
    json fit;
    if (series.size() >= static_cast<std::size_t>(degree) + 2) {
      fit = analytics::to_json(analytics::loess_fit(series, span, degree));
    }
    return json_response(200, {{"series", analytics::to_json(series)}, {"fit", fit}});
  });
}

Api::~Api() = default;

ApiResponse Api::handle(const ApiRequest& request) {
  try {
    return dispatch(request);
  } catch (const Error& e) {
    return error_response(http_status(e.code()), to_string(e.code()), e.what(), e.details());
  } catch (const json::exception& e) {
    return error_response(400, "BadRequest", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "Internal", e.what());
  }
}

ApiResponse Api::dispatch(const ApiRequest& request) {
  std::string_view path = request.path;
  if (!path.starts_with(kApiPrefix)) return error_response(404, "NotFound", "no such endpoint");
  path.remove_prefix(kApiPrefix.size());
  const auto segments = split_path(path);

  bool path_matched = false;
  for (const auto& route : routes_) {
    if (route.pattern.size() != segments.size()) continue;
    std::vector<std::string> params;
    bool match = true;
    for (std::size_t i = 0; i < segments.size() && match; ++i) {
      if (route.pattern[i] == "{}") {
        params.push_back(segments[i]);
      } else {
        match = route.pattern[i] == segments[i];
      }
    }
    if (!match) continue;
    path_matched = true;
    if (route.method != request.method) continue;
    Context ctx{request, std::move(params), std::nullopt};
    if (route.endpoint) ctx.actor = authenticate(bearer_token(request.authorization), *route.endpoint);
    return route.handler(ctx);
  }
  if (path_matched) return error_response(405, "MethodNotAllowed", "method not allowed on this path");
  return error_response(404, "NotFound", "no such endpoint");
}

}  // namespace fieldlink::gateway
