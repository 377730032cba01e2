#include "fieldlink/gateway/platform.hpp"

#include <iostream>

#include <boost/asio/post.hpp>
#include <boost/asio/thread_pool.hpp>

#include "fieldlink/common/error.hpp"
#include "fieldlink/store/collections.hpp"

namespace fieldlink::gateway {

namespace {

PasswordHashParams hashing_for(const ServerConfig& c) {
  return c.password_hashing == "minimal" ? PasswordHashParams::minimal() : PasswordHashParams::interactive();
}

}  // namespace

Platform::Platform(const ServerConfig& config, const Clock& clock)
    : config_(config),
      clock_(clock),
      docs_(config.data_dir, {.sync_writes = config.sync_writes}),
      blobs_(config.data_dir / "blobs"),
      hub_([this](const Actor& actor, std::string_view topic) { return can_subscribe(actor, topic); }),
      registry_(docs_, clock_, hashing_for(config)),
      models_(diagnosis::ModelSlot::open(config.model_path)),
      chat_(docs_, registry_, hub_, clock_),
      market_(docs_, blobs_, registry_, hub_, clock_),
      diagnosis_(docs_, blobs_, registry_, *models_, hub_, clock_),
      workers_(std::make_unique<boost::asio::thread_pool>(config.worker_threads)) {
  diagnosis_.set_enqueue([this](const std::string& id) { enqueue(id); });
}

Platform::~Platform() { stop(); }

void Platform::enqueue(const std::string& request_id) {
  {
    std::lock_guard lock(jobs_mu_);
    ++jobs_pending_;
    last_attempt_[request_id] = clock_.now();
  }
  boost::asio::post(*workers_, [this, request_id] {
    try {
      diagnosis_.process_sample(request_id);
    } catch (const Error& e) {
      // Pipeline failures stay Submitted and are retried by the sweep.
      if (e.code() != Errc::invalid_state) {
        std::cerr << "processing " << request_id << " failed: " << e.what() << "\n";
      }
    } catch (const std::exception& e) {
      std::cerr << "processing " << request_id << " failed: " << e.what() << "\n";
    }
    std::lock_guard lock(jobs_mu_);
    --jobs_pending_;
    jobs_cv_.notify_all();
  });
}

void Platform::wait_idle() {
  std::unique_lock lock(jobs_mu_);
  jobs_cv_.wait(lock, [&] { return jobs_pending_ == 0; });
}

void Platform::sweep_once() {
  try {
    market_.sweep();
  } catch (const std::exception& e) {
    std::cerr << "auction sweep failed: " << e.what() << "\n";
  }
  const auto now = clock_.now();
  for (const auto& id : diagnosis_.pending_requests()) {
    bool due = false;
    {
      std::lock_guard lock(jobs_mu_);
      const auto it = last_attempt_.find(id);
      due = it == last_attempt_.end() || now - it->second >= config_.retry_interval;
    }
    if (due) enqueue(id);
  }
}

void Platform::sweeper_loop() {
  std::unique_lock lock(sweeper_mu_);
  while (!stopping_) {
    if (sweeper_cv_.wait_for(lock, config_.sweep_interval, [&] { return stopping_; })) break;
    lock.unlock();
    sweep_once();
    lock.lock();
  }
}

void Platform::start_background() {
  std::lock_guard lock(sweeper_mu_);
  if (sweeper_.joinable() || stopping_) return;
  sweeper_ = std::thread([this] { sweeper_loop(); });
}

void Platform::stop() {
  {
    std::lock_guard lock(sweeper_mu_);
    stopping_ = true;
  }
  sweeper_cv_.notify_all();
  if (sweeper_.joinable()) sweeper_.join();
  if (workers_) {
    workers_->join();
  }
  hub_.detach_all();
}

bool Platform::can_subscribe(const Actor& actor, std::string_view topic) const {
  if (topic == diagnosis::kQueueTopic) return actor.role == Role::agronomist;
  if (topic.starts_with("th_")) return chat_.is_participant(actor.user_id, topic);
  if (topic.starts_with("lst_")) {
    const auto doc = docs_.find(store::collections::listings, topic);
    if (!doc) return false;
    if (actor.role == Role::farmer) return doc->payload.at("farmer_id") == actor.user_id;
    if (actor.role == Role::merchant) {
      // Open listings, or closed ones the merchant bid on.
      if (doc->payload.at("status") == "open") return true;
      for (const auto& o : market_.offers_for(topic)) {
        if (o.merchant_id == actor.user_id) return true;
      }
    }
    return false;
  }
  if (topic.starts_with("req_")) {
    const auto doc = docs_.find(store::collections::requests, topic);
    if (!doc) return false;
    if (actor.role == Role::farmer) return doc->payload.at("farmer_id") == actor.user_id;
    return actor.role == Role::agronomist;
  }
  return false;
}

}  // namespace fieldlink::gateway
