// Acceptance suite: one PASS/FAIL line per primary criterion. Exits non-zero
// if any criterion fails. NOTE lines record known divergences from the
// reference figures; they do not affect the exit code.

#include <atomic>
#include <barrier>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "fieldlink/analytics/loess.hpp"
#include "fieldlink/analytics/usage.hpp"
#include "fieldlink/chat/chat.hpp"
#include "fieldlink/common/crypto.hpp"
#include "fieldlink/common/error.hpp"
#include "fieldlink/common/events.hpp"
#include "fieldlink/diagnosis/diagnosis.hpp"
#include "fieldlink/diagnosis/model_slot.hpp"
#include "fieldlink/gateway/realtime_client.hpp"
#include "fieldlink/marketplace/marketplace.hpp"
#include "fieldlink/neuralnet/metrics.hpp"
#include "fieldlink/neuralnet/model.hpp"
#include "fieldlink/neuralnet/network_spec.hpp"
#include "fieldlink/neuralnet/train.hpp"
#include "fieldlink/registry/registry.hpp"
#include "fieldlink/seed/fixtures.hpp"
#include "fieldlink/store/blob_store.hpp"
#include "fieldlink/store/collections.hpp"
#include "fieldlink/store/document_store.hpp"
#include "fieldlink/testing/live_server.hpp"
#include "fieldlink/testing/oracles.hpp"
#include "fieldlink/testing/support.hpp"
#include "fieldlink/vegindex/heatmap.hpp"
#include "fieldlink/vegindex/index.hpp"

namespace {

using namespace fieldlink;
using namespace std::chrono_literals;
using testing::TempDir;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> notes;
};

// Collects sub-check failures for one criterion.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void note(std::string text) { notes_.push_back(std::move(text)); }
  Outcome finish(const std::string& summary) const {
    Outcome o{failures_.empty(), summary, notes_};
    if (!o.pass) {
      o.detail = failures_.front();
      if (failures_.size() > 1) o.detail += " (+" + std::to_string(failures_.size() - 1) + " more)";
    }
    return o;
  }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string fmt(double v, int precision = 3) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Services over one private store, without a network in front.
struct LocalPlatform {
  TempDir dir;
  ManualClock clock;
  EventLog events;
  store::DocumentStore docs{dir / "docs"};
  store::BlobStore blobs{dir / "blobs"};
  registry::Registry registry{docs, clock, PasswordHashParams::minimal()};
  diagnosis::ModelSlot models{neuralnet::Model::build(neuralnet::NetworkSpec::compact(), 0)};
  chat::ChatService chat{docs, registry, events, clock};
  marketplace::MarketplaceService market{docs, blobs, registry, events, clock};
  diagnosis::DiagnosisService diagnosis{docs, blobs, registry, models, events, clock};

  Actor user(const std::string& name, Role role) {
    const auto [account, session] = registry.register_user(name, role, {"+55 16 0000", "Bebedouro"}, "correct horse");
    return {account.id, role};
  }
};

// ---------------------------------------------------------------------------

Outcome vegetation_indices() {
  Checks c;
  const auto start = Clock::now();
  auto single = [](double r, double g, double b, vegindex::IndexKind kind) {
    const vegindex::ReflectanceImage img(1, 1, {{r, g, b}});
    return vegindex::compute_index(img, kind).values[0];
  };
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9; };
  c.expect(near(single(0.3, 0.3, 0.3, vegindex::IndexKind::tgi), 0.0), "uniform pixel TGI != 0");
  c.expect(near(single(0.3, 0.3, 0.3, vegindex::IndexKind::grvi), 0.0), "uniform pixel GRVI != 0");
  c.expect(near(single(0.0, 1.0, 0.0, vegindex::IndexKind::tgi), 95.0), "pure green TGI != 95");
  c.expect(near(single(0.0, 1.0, 0.0, vegindex::IndexKind::grvi), 1.0), "pure green GRVI != 1");
  c.expect(near(single(0.4, 0.5, 0.2, vegindex::IndexKind::tgi), 21.5), "mixed pixel TGI != 21.5");
  c.expect(near(single(0.2, 0.6, 0.0, vegindex::IndexKind::grvi), 0.5), "mixed pixel GRVI != 0.5");

  // Row: low, mid, high, black (masked for GRVI).
  vegindex::RgbImage rgb(4, 1);
  rgb.set(0, 0, 200, 40, 0);
  rgb.set(1, 0, 100, 100, 0);
  rgb.set(2, 0, 20, 220, 0);
  rgb.set(3, 0, 0, 0, 0);
  const auto map = vegindex::compute_index(vegindex::to_reflectance(rgb), vegindex::IndexKind::grvi);
  const auto heat = vegindex::decode_rgb(vegindex::render_heatmap(map));
  auto color = [&](int x) { return std::array<int, 3>{heat.at(x, 0)[0], heat.at(x, 0)[1], heat.at(x, 0)[2]}; };
  c.expect(color(0) == std::array<int, 3>{255, 0, 0}, "minimum is not pure red");
  c.expect(color(2) == std::array<int, 3>{0, 0, 255}, "maximum is not pure blue");
  c.expect(color(3) == std::array<int, 3>{128, 128, 128}, "masked pixel is not mid-gray");
  const double t = seconds_since(start);
  c.expect(t < 1.0, "runtime " + fmt(t) + "s exceeds 1s");
  return c.finish("6 formula cases to 1e-9, heatmap endpoints bit-exact, " + fmt(t * 1000, 3) + " ms");
}

Outcome cnn_structure() {
  Checks c;
  const auto spec = neuralnet::NetworkSpec::canonical();
  const std::vector<neuralnet::Shape> table = {
      {224, 224, 16}, {112, 112, 16}, {112, 112, 32}, {56, 56, 32}, {56, 56, 64},
      {28, 28, 64},   {28, 28, 64},   {50176},        {128},        {6}};
  const auto shapes = neuralnet::layer_output_shapes(spec);
  c.expect(shapes.size() == table.size(), std::to_string(shapes.size()) + " layers instead of 10");
  for (std::size_t i = 0; i < std::min(shapes.size(), table.size()); ++i) {
    c.expect(shapes[i] == table[i], "layer " + std::to_string(i + 1) + " output " + neuralnet::shape_string(shapes[i]) +
                                        " != " + neuralnet::shape_string(table[i]));
  }
  const auto counted = neuralnet::count_parameters(spec);
  c.expect(counted == testing::kCanonicalParams,
           "count_parameters " + std::to_string(counted) + " != per-layer oracle " + std::to_string(testing::kCanonicalParams));
  const auto built = neuralnet::Model::build(spec, 0).parameter_count();
  c.expect(built == counted, "allocated parameters " + std::to_string(built) + " != count_parameters");
  c.note("expected divergence: the reference network description states " + std::to_string(testing::kReferenceParams) +
         " trainable parameters; the listed layers yield " + std::to_string(testing::kCanonicalParams) +
         " (448 + 4,640 + 18,496 + 6,422,656 + 774)");
  return c.finish("10/10 output shapes, " + std::to_string(counted) + " parameters");
}

Outcome gradient_check() {
  Checks c;
  const auto start = Clock::now();
  const auto model = neuralnet::Model::build(neuralnet::NetworkSpec::compact(), 7);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  neuralnet::Tensor input(model.input_shape());
  for (auto& v : input.values()) v = unit(rng);
  const std::size_t label = 3;

  auto grads = model.zero_gradients();
  neuralnet::backward(model, neuralnet::forward(model, input, neuralnet::Mode::infer), label, grads);

  // Flat addressing over every weight and bias.
  struct Slot {
    std::size_t layer;
    bool bias;
    std::size_t index;
  };
  std::vector<Slot> slots;
  for (std::size_t l = 0; l < model.parameters().size(); ++l) {
    for (std::size_t i = 0; i < model.parameters()[l].weights.size(); ++i) slots.push_back({l, false, i});
    for (std::size_t i = 0; i < model.parameters()[l].bias.size(); ++i) slots.push_back({l, true, i});
  }
  auto probe = model;
  auto loss_at = [&](const Slot& s, double value) {
    auto& t = s.bias ? probe.parameters()[s.layer].bias : probe.parameters()[s.layer].weights;
    const double saved = t[s.index];
    t[s.index] = value;
    const double loss = neuralnet::cross_entropy(neuralnet::forward(probe, input, neuralnet::Mode::infer), label);
    t[s.index] = saved;
    return loss;
  };

  constexpr double h = 1e-5;
  double worst = 0.0;
  std::size_t checked = 0;
  while (checked < 100) {
    const auto& s = slots[rng() % slots.size()];
    const auto& t = s.bias ? model.parameters()[s.layer].bias : model.parameters()[s.layer].weights;
    const double analytic = (s.bias ? grads[s.layer].bias : grads[s.layer].weights)[s.index];
    const double numeric = (loss_at(s, t[s.index] + h) - loss_at(s, t[s.index] - h)) / (2 * h);
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    const double rel = scale < 1e-9 ? 0.0 : std::abs(analytic - numeric) / scale;
    worst = std::max(worst, rel);
    ++checked;
  }
  c.expect(worst <= 1e-3, "worst relative error " + fmt(worst) + " > 1e-3");
  const double t = seconds_since(start);
  c.expect(t < 60.0, "runtime " + fmt(t) + "s exceeds 60s");
  return c.finish("100 parameters, worst relative error " + fmt(worst, 2) + ", " + fmt(t) + " s");
}

// Shared by the memorization check; trains the compact network on the
// 12-image colour-patch set.
neuralnet::TrainResult memorize() {
  neuralnet::TrainConfig cfg;
  cfg.epochs = 200;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.01;
  cfg.seed = 1;
  cfg.augmentation.enabled = false;
  return neuralnet::train(neuralnet::Model::build(neuralnet::NetworkSpec::compact(), cfg.seed),
                          testing::color_patch_dataset(2, 16, 0), cfg);
}

Outcome classifier_substitutes() {
  Checks c;
  const auto start = Clock::now();

  // (a) memorization, twice for determinism.
  const auto data = testing::color_patch_dataset(2, 16, 0);
  const auto first = memorize();
  const auto second = memorize();
  neuralnet::LabeledDataset train_items;
  for (const auto i : first.split.train) train_items.push_back(data[i]);
  const double accuracy = neuralnet::evaluate(first.model, train_items).accuracy;
  c.expect(data.size() == 12 && train_items.size() == 12, "training split is not all 12 images");
  c.expect(accuracy == 1.0, "training accuracy " + fmt(accuracy) + " after 200 epochs");
  c.expect(first.model == second.model && first.loss_trace == second.loss_trace, "training is not deterministic");

  // (b) F1 recomputed from the reference precision / recall.
  struct Row {
    const char* name;
    double p, r, f1;
  };
  constexpr Row kTable[] = {{"Alternaria", 0.94, 0.94, 0.94},
                            {"Acarus", 0.97, 0.97, 0.97},
                            {"Canker", 0.84, 0.91, 0.88},
                            {"MagnesiumDef", 0.98, 0.95, 0.96},
                            {"ZincDef", 0.92, 0.88, 0.90}};
  double worst_f1 = 0.0;
  for (const auto& row : kTable) {
    const double diff = std::abs(neuralnet::f1_score(row.p, row.r) - row.f1);
    worst_f1 = std::max(worst_f1, diff);
    c.expect(diff <= 0.01 + 1e-12, std::string(row.name) + " F1 differs by " + fmt(diff));
  }

  // (c) evaluate() against direct counting.
  std::mt19937_64 rng(5);
  std::size_t mismatches = 0;
  for (int setup = 0; setup < 50; ++setup) {
    const std::size_t n = 5 + rng() % 40;
    std::vector<std::size_t> truth(n);
    std::vector<std::size_t> predicted(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = rng() % neuralnet::kClassCount;
      predicted[i] = rng() % 3 == 0 ? truth[i] : rng() % neuralnet::kClassCount;
    }
    neuralnet::LabeledDataset items;
    for (std::size_t i = 0; i < n; ++i) {
      // The classifier reads the prediction back out of the red channel.
      items.push_back({testing::solid_image(2, 2, static_cast<std::uint8_t>(predicted[i]), 0, 0),
                       neuralnet::kAllClasses[truth[i]]});
    }
    const auto report = neuralnet::evaluate([](const vegindex::RgbImage& img) { return std::size_t{img.at(0, 0)[0]}; }, items);
    const auto oracle = testing::count_metrics(truth, predicted, neuralnet::kClassCount);
    bool same = std::abs(report.accuracy - oracle.accuracy) < 1e-12;
    for (std::size_t k = 0; k < neuralnet::kClassCount; ++k) {
      same = same && std::abs(report.per_class[k].precision - oracle.precision[k]) < 1e-12 &&
             std::abs(report.per_class[k].recall - oracle.recall[k]) < 1e-12 &&
             std::abs(report.per_class[k].f1 - oracle.f1[k]) < 1e-12;
    }
    mismatches += !same;
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + "/50 confusion setups disagree with counting");
  c.note("the reference 93% accuracy on 1,250 field images is not reproducible without the dataset; "
         "memorization, F1 consistency and the counting oracle stand in for it");
  return c.finish("memorized 12/12 (deterministic), F1 within " + fmt(worst_f1, 2) + ", 50/50 confusion setups, " +
                  fmt(seconds_since(start)) + " s");
}

Outcome auction_properties() {
  Checks c;
  const auto start = Clock::now();
  LocalPlatform p;
  const auto farmer = p.user("farmer", Role::farmer);
  std::vector<Actor> merchants;
  for (int i = 0; i < 5; ++i) merchants.push_back(p.user("merchant-" + std::to_string(i), Role::merchant));

  std::mt19937_64 rng(2024);
  std::size_t mismatched = 0;
  for (int stream = 0; stream < 1000; ++stream) {
    marketplace::ListingDetails d;
    d.product_name = "lot";
    d.quantity = 10;
    d.unit = "kg";
    d.starting_price = static_cast<marketplace::Money>(rng() % 50);
    d.ends_at = p.clock.now() + 1h;
    const auto listing = p.market.publish_listing(farmer, d);

    std::vector<testing::BidAttempt> attempts;
    const std::size_t n = rng() % 12;
    for (std::size_t i = 0; i < n; ++i) {
      attempts.push_back({merchants[rng() % merchants.size()].user_id, static_cast<std::int64_t>(rng() % 120)});
    }
    p.events.clear();
    std::vector<std::size_t> accepted;
    for (std::size_t i = 0; i < attempts.size(); ++i) {
      try {
        p.market.place_offer({attempts[i].merchant, Role::merchant}, listing.id, attempts[i].amount);
        accepted.push_back(i);
      } catch (const Error& e) {
        if (e.code() != Errc::bid_too_low) throw;
      }
    }
    p.clock.advance(2h);
    const auto outcome = p.market.close_auction(listing.id);
    const auto oracle = testing::fold_auction(d.starting_price, attempts);

    bool same = accepted == oracle.accepted;
    same = same && outcome.listing.best_merchant_id == oracle.winner && outcome.listing.best_amount == oracle.price;
    same = same && (outcome.purchase.has_value() == oracle.winner.has_value());
    for (const auto& m : merchants) {
      const auto expected = oracle.outbid.count(m.user_id) ? oracle.outbid.at(m.user_id) : 0;
      same = same && p.events.count(std::string(marketplace::kOutbidEvent), m.user_id) == expected;
    }
    mismatched += !same;
  }
  c.expect(mismatched == 0, std::to_string(mismatched) + "/1000 streams disagree with the fold oracle");

  // Concurrent bidding on one listing.
  marketplace::ListingDetails d;
  d.product_name = "contested lot";
  d.quantity = 1;
  d.unit = "t";
  d.starting_price = 1;
  d.ends_at = p.clock.now() + 1h;
  const auto listing = p.market.publish_listing(farmer, d);
  std::atomic<std::int64_t> next_amount{1};
  std::vector<std::thread> bidders;
  std::atomic<std::size_t> accepted{0};
  for (std::size_t t = 0; t < merchants.size(); ++t) {
    bidders.emplace_back([&, t] {
      for (int i = 0; i < 40; ++i) {
        const auto amount = next_amount.fetch_add(1) + static_cast<std::int64_t>(t % 2);
        try {
          p.market.place_offer(merchants[t], listing.id, amount);
          ++accepted;
        } catch (const Error& e) {
          if (e.code() != Errc::bid_too_low) throw;
        }
      }
    });
  }
  for (auto& b : bidders) b.join();
  const auto offers = p.market.offers_for(listing.id);
  bool gapless = offers.size() == accepted.load();
  for (std::size_t i = 0; i < offers.size(); ++i) {
    gapless = gapless && offers[i].seq == i + 1;
    if (i > 0) gapless = gapless && offers[i].amount > offers[i - 1].amount;
  }
  c.expect(gapless, "concurrent offers are not gapless and strictly increasing");
  p.clock.advance(2h);
  p.market.sweep();
  const auto closed = p.market.listing(listing.id);
  const auto purchases = p.docs.list(store::collections::purchases, store::ListQuery::matching("listing_id", listing.id));
  c.expect(closed.status == marketplace::ListingStatus::closed_sold, "contested listing did not close as sold");
  c.expect(purchases.size() == 1, std::to_string(purchases.size()) + " purchases for the contested listing");
  c.expect(!offers.empty() && closed.best_amount == offers.back().amount, "winning price is not the last accepted offer");

  const double t = seconds_since(start);
  c.expect(t < 30.0, "runtime " + fmt(t) + "s exceeds 30s");
  return c.finish("1000/1000 streams match, " + std::to_string(offers.size()) + " concurrent offers gapless, one winner, " +
                  fmt(t) + " s");
}

Outcome diagnosis_end_to_end() {
  Checks c;
  const auto start = Clock::now();
  testing::LiveServer server;
  testing::HttpClient http(server.port());
  const auto farmer = http.register_user("farmer-e2e", "farmer");
  const auto agro_a = http.register_user("agronomist-a", "agronomist");
  const auto agro_b = http.register_user("agronomist-b", "agronomist");
  gateway::RealtimeClient farmer_rt("127.0.0.1", server.port(), farmer.token);

  const auto farm = http.post("/api/v1/farms", {{"name", "La Esperanza"}, {"locality", "Bebedouro"}}, farmer.token);
  c.expect(farm.status == 201, "create farm: " + farm.raw);
  const auto crop = http.post("/api/v1/farms/" + farm.body.value("id", "") + "/crops",
                              {{"kind", "orange"}, {"planted_at", "2018-09-01"}}, farmer.token);
  c.expect(crop.status == 201, "create crop: " + crop.raw);

  vegindex::RgbImage leaf(64, 48);
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 64; ++x) leaf.set(x, y, static_cast<std::uint8_t>(60 + x), static_cast<std::uint8_t>(120 + y), 40);
  }
  const auto png = testing::png_bytes(leaf);
  const auto sample = http.post("/api/v1/diagnosis/samples",
                                {{"crop_id", crop.body.value("id", "")}, {"image_base64", base64_encode(png)}}, farmer.token);
  c.expect(sample.status == 201, "submit sample: " + sample.raw);
  const auto request_id = sample.body.value("id", "");

  // The farmer is told once processing has finished.
  std::optional<gateway::Frame> processed;
  while (auto f = farmer_rt.next_frame(8s)) {
    if (f->type == diagnosis::kProcessedEvent) {
      processed = f;
      break;
    }
  }
  c.expect(processed.has_value(), "no diagnosis.processed frame");

  const auto seen = http.get("/api/v1/diagnosis/requests/" + request_id, agro_a.token);
  auto att = seen.body.is_object() ? seen.body.value("attachments", nlohmann::json()) : nlohmann::json();
  c.expect(seen.status == 200 && seen.body.value("state", "") == "processed", "request not processed: " + seen.raw);
  c.expect(att.is_object() && att["tgi"].is_object() && att["grvi"].is_object(), "missing index summaries");
  c.expect(att.is_object() && att["prediction"].is_object(), "missing CNN prediction");
  std::size_t heatmaps = 0;
  for (const auto* key : {"tgi_heatmap", "grvi_heatmap"}) {
    if (!att.is_object() || !att[key].is_string()) continue;
    const auto blob = http.get("/api/v1/blobs/" + att[key].get<std::string>(), agro_a.token);
    heatmaps += blob.status == 200 && !blob.raw.empty();
  }
  c.expect(heatmaps == 2, std::to_string(heatmaps) + " heatmaps retrievable");

  // Both agronomists claim at once.
  auto claim = [&](const std::string& token) {
    testing::HttpClient own(server.port());
    return own.post("/api/v1/diagnosis/requests/" + request_id + "/claim", nlohmann::json::object(), token).status;
  };
  auto fa = std::async(std::launch::async, claim, agro_a.token);
  auto fb = std::async(std::launch::async, claim, agro_b.token);
  const int sa = fa.get();
  const int sb = fb.get();
  c.expect((sa == 200) != (sb == 200) && (sa == 409 || sb == 409),
           "double claim statuses " + std::to_string(sa) + "/" + std::to_string(sb));
  const auto& winner = sa == 200 ? agro_a : agro_b;

  const auto report = http.post("/api/v1/diagnosis/requests/" + request_id + "/report",
                                {{"diagnosis", "Citrus canker lesions on the lower leaves"},
                                 {"confirmed_class", "Canker"},
                                 {"recommendations", "Copper spray every 21 days"}},
                                winner.token);
  c.expect(report.status == 201, "file report: " + report.raw);

  std::size_t report_frames = 0;
  for (const auto& f : farmer_rt.drain(500ms)) report_frames += f.type == diagnosis::kReportEvent;
  c.expect(report_frames == 1, std::to_string(report_frames) + " diagnosis.report frames for the farmer");

  const auto labels = server.platform().diagnosis().harvest_training_labels();
  c.expect(labels.size() == 1 && labels.front().label == neuralnet::DiseaseClass::canker && labels.front().image_bytes == png,
           std::to_string(labels.size()) + " harvested labels");
  c.expect(server.platform().diagnosis().harvest_training_labels().empty(), "second harvest is not empty");
  farmer_rt.close();

  const double t = seconds_since(start);
  c.expect(t < 10.0, "runtime " + fmt(t) + "s exceeds 10s");
  return c.finish("2 summaries + 2 heatmaps + prediction, one claim wins, 1 report frame, 1 label, " + fmt(t) + " s");
}

Outcome chat_ordering() {
  Checks c;
  const auto start = Clock::now();
  testing::LiveServer server;
  testing::HttpClient http(server.port());
  const auto ana = http.register_user("ana", "farmer");
  const auto bruno = http.register_user("bruno", "merchant");
  const auto thread = http.post("/api/v1/chat/threads", {{"user_id", bruno.user_id}}, ana.token);
  c.expect(thread.status == 200, "open thread: " + thread.raw);
  const auto thread_id = thread.body.value("id", "");

  gateway::RealtimeClient ana_rt("127.0.0.1", server.port(), ana.token);
  gateway::RealtimeClient bruno_rt("127.0.0.1", server.port(), bruno.token);
  ana_rt.subscribe(thread_id);
  bruno_rt.subscribe(thread_id);

  constexpr int kPerSender = 100;
  auto send_all = [&](const testing::Session& who) {
    testing::HttpClient own(server.port());
    int ok = 0;
    for (int i = 0; i < kPerSender; ++i) {
      ok += own.post("/api/v1/chat/threads/" + thread_id + "/messages", {{"body", "m" + std::to_string(i)}}, who.token)
                .status == 201;
    }
    return ok;
  };
  auto fa = std::async(std::launch::async, send_all, ana);
  auto fb = std::async(std::launch::async, send_all, bruno);
  const int sent = fa.get() + fb.get();
  c.expect(sent == 2 * kPerSender, std::to_string(sent) + " messages accepted");

  for (auto* rt : {&ana_rt, &bruno_rt}) {
    std::vector<std::uint64_t> seqs;
    for (const auto& f : rt->drain(500ms)) {
      if (f.type == chat::kMessageEvent) seqs.push_back(f.payload.at("seq").get<std::uint64_t>());
    }
    std::vector<std::uint64_t> expected(2 * kPerSender);
    std::iota(expected.begin(), expected.end(), 1);
    c.expect(seqs == expected, "receiver saw " + std::to_string(seqs.size()) + " messages out of sequence order");
    const auto frame_seqs = rt->received_seqs();
    bool gapless = true;
    for (std::size_t i = 0; i < frame_seqs.size(); ++i) gapless = gapless && frame_seqs[i] == i + 1;
    c.expect(gapless, "frame sequence numbers have gaps");
  }

  // Pages of 7 partition the history.
  std::vector<std::uint64_t> paged;
  std::uint64_t after = 0;
  for (;;) {
    const auto page = http.get("/api/v1/chat/threads/" + thread_id + "/messages?after=" + std::to_string(after) + "&limit=7",
                               ana.token);
    if (page.status != 200 || page.body.value("items", nlohmann::json::array()).empty()) break;
    for (const auto& m : page.body.at("items")) paged.push_back(m.at("seq").get<std::uint64_t>());
    after = paged.back();
  }
  std::vector<std::uint64_t> expected(2 * kPerSender);
  std::iota(expected.begin(), expected.end(), 1);
  c.expect(paged == expected, "pagination returned " + std::to_string(paged.size()) + " messages, not a partition of 1..200");
  ana_rt.close();
  bruno_rt.close();
  return c.finish("2 x 100 messages, both receivers in seq order 1..200, gapless frames, 29 pages partition, " +
                  fmt(seconds_since(start)) + " s");
}

Outcome usage_fixture() {
  Checks c;
  LocalPlatform p;
  seed::seed_usage({p.registry, p.chat, p.market, p.diagnosis, p.clock});
  const auto s = analytics::compute_usage_stats(p.docs);
  auto cell = [&](const char* name, std::uint64_t got, std::uint64_t want) {
    c.expect(got == want, std::string(name) + " " + std::to_string(got) + " != " + std::to_string(want));
  };
  cell("farmers", s.farmers, 146);
  cell("agronomists", s.agronomists, 9);
  cell("merchants", s.merchants, 12);
  cell("chats", s.chats, 171);
  cell("samples", s.samples, 38);
  cell("products", s.products, 65);
  cell("messages", s.messages, 1350);
  cell("farms", s.farms, 80);
  cell("crops", s.crops, 275);
  cell("total users (farmers + agronomists + merchants)", s.total_users, s.farmers + s.agronomists + s.merchants);
  c.expect(registry::check_integrity(p.docs, p.blobs).empty(), "seeded store fails the integrity check");
  c.note("expected divergence: the reference usage table states 171 total users, but its role counts "
         "146 + 9 + 12 sum to 167; total users is reported as the sum (" + std::to_string(s.total_users) + ")");
  return c.finish("every role, chat, sample, product, message, farm and crop cell reproduced");
}

Outcome loess_checks() {
  Checks c;
  std::vector<double> x(30);
  std::iota(x.begin(), x.end(), 0.0);
  double worst_poly = 0.0;
  for (const int degree : {1, 2}) {
    for (const double span : {0.2, 0.4, 0.75, 1.0}) {
      std::vector<double> y;
      for (const double xi : x) y.push_back(degree == 2 ? 0.5 * xi * xi - 3 * xi + 7 : -2.5 * xi + 4);
      for (const auto& pt : analytics::loess_fit(x, y, span, degree).points) worst_poly = std::max(worst_poly, std::abs(pt.fitted - pt.y));
    }
  }
  c.expect(worst_poly <= 1e-9, "polynomial reproduction error " + fmt(worst_poly));

  std::mt19937_64 rng(90);
  std::uniform_real_distribution<double> noise(-3.0, 3.0);
  std::vector<double> lx(90);
  std::vector<double> ly(90);
  for (std::size_t i = 0; i < 90; ++i) {
    lx[i] = static_cast<double>(i);
    ly[i] = 2 * lx[i] + 1 + noise(rng);
  }
  double worst_shift = 0.0;
  for (const int degree : {1, 2}) {
    auto shifted = ly;
    for (auto& v : shifted) v += 123.25;
    const auto a = analytics::loess_fit(lx, ly, 0.75, degree);
    const auto b = analytics::loess_fit(lx, shifted, 0.75, degree);
    for (std::size_t i = 0; i < 90; ++i) worst_shift = std::max(worst_shift, std::abs(b.points[i].fitted - a.points[i].fitted - 123.25));
  }
  c.expect(worst_shift <= 1e-9, "y-shift error " + fmt(worst_shift));

  double worst_oracle = 0.0;
  for (const int degree : {1, 2}) {
    const auto fit = analytics::loess_fit(lx, ly, 0.75, degree);
    for (const std::size_t probe : {0, 17, 45, 71, 89}) {
      worst_oracle = std::max(worst_oracle, std::abs(fit.points[probe].fitted - testing::loess_oracle(lx, ly, probe, 0.75, degree)));
    }
  }
  c.expect(worst_oracle <= 1e-6, "normal-equations oracle differs by " + fmt(worst_oracle));
  return c.finish("polynomials to " + fmt(worst_poly, 2) + ", y-shift to " + fmt(worst_shift, 2) + ", oracle probes to " +
                  fmt(worst_oracle, 2));
}

Outcome store_checks() {
  Checks c;
  TempDir dir;
  {
    store::DocumentStore docs(dir / "contention");
    constexpr int kRounds = 20;
    constexpr int kWriters = 100;
    std::vector<std::uint64_t> winning_versions;
    bool one_winner_each = true;
    for (int round = 0; round < kRounds; ++round) {
      const std::uint64_t expected = docs.find("counters", "c") ? docs.get("counters", "c").version : 0;
      std::atomic<int> winners{0};
      std::atomic<std::uint64_t> won_version{0};
      std::barrier sync(kWriters);
      std::vector<std::thread> writers;
      for (int w = 0; w < kWriters; ++w) {
        writers.emplace_back([&, w] {
          sync.arrive_and_wait();
          try {
            won_version = docs.put_cas("counters", "c", expected, {{"round", round}, {"writer", w}});
            ++winners;
          } catch (const Error& e) {
            if (e.code() != Errc::version_conflict) throw;
          }
        });
      }
      for (auto& t : writers) t.join();
      one_winner_each = one_winner_each && winners == 1;
      winning_versions.push_back(won_version);
    }
    c.expect(one_winner_each, "a contention round did not have exactly one winner");
    std::vector<std::uint64_t> expected(kRounds);
    std::iota(expected.begin(), expected.end(), 1);
    c.expect(winning_versions == expected, "version history has gaps");
  }

  std::string before;
  std::map<std::string, std::uint64_t> versions;
  {
    store::StoreOptions options;
    options.compact_after = 64;
    store::DocumentStore docs(dir / "recovery", options);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
      const auto id = "doc-" + std::to_string(rng() % 120);
      store::update_with_retry(docs, "items", id, [&](nlohmann::json p) {
        if (p.is_null()) p = {{"n", 0}};
        p["n"] = p["n"].get<int>() + 1;
        return p;
      });
    }
    before = docs.fingerprint();
    for (const auto& d : docs.list("items")) versions[d.id] = d.version;
  }
  store::DocumentStore reopened(dir / "recovery");
  bool all_back = reopened.count("items") == versions.size();
  for (const auto& [id, v] : versions) {
    const auto d = reopened.find("items", id);
    all_back = all_back && d && d->version == v && d->payload["n"].get<std::uint64_t>() == v;
  }
  c.expect(all_back, "documents lost or changed across restart");
  c.expect(reopened.fingerprint() == before, "store fingerprint changed across restart");
  return c.finish("20 rounds x 100 writers, one winner per round, versions 1..20; " + std::to_string(versions.size()) +
                  " documents recovered intact");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"vegetation-indices", vegetation_indices},
      {"cnn-structure", cnn_structure},
      {"gradient-check", gradient_check},
      {"classifier-substitutes", classifier_substitutes},
      {"auction-properties", auction_properties},
      {"diagnosis-end-to-end", diagnosis_end_to_end},
      {"chat-ordering", chat_ordering},
      {"usage-fixture", usage_fixture},
      {"loess", loess_checks},
      {"store", store_checks},
  };
  int failed = 0;
  std::vector<std::string> notes;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what(), {}};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    failed += !o.pass;
    for (auto& n : o.notes) notes.push_back(std::string(name) + ": " + n);
  }
  for (const auto& n : notes) std::cout << "NOTE " << n << "\n";
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
