#pragma once

#include <atomic>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "fieldlink/chat/chat.hpp"
#include "fieldlink/common/clock.hpp"
#include "fieldlink/diagnosis/diagnosis.hpp"
#include "fieldlink/diagnosis/model_slot.hpp"
#include "fieldlink/gateway/config.hpp"
#include "fieldlink/gateway/hub.hpp"
#include "fieldlink/marketplace/marketplace.hpp"
#include "fieldlink/registry/registry.hpp"
#include "fieldlink/store/blob_store.hpp"
#include "fieldlink/store/document_store.hpp"

namespace boost::asio {
class thread_pool;
}

namespace fieldlink::gateway {

// Every service wired to one store and one realtime hub, plus the
// background work: the sample-processing pool and the periodic sweep that
// closes ended auctions and retries failed processing.
class Platform {
 public:
  Platform(const ServerConfig& config, const Clock& clock);
  ~Platform();

  Platform(const Platform&) = delete;
  Platform& operator=(const Platform&) = delete;

  /// Starts the sweeper thread. Processing jobs run whether or not it is started.
  void start_background();
  void stop();

  /// Blocks until no processing job is queued or running.
  void wait_idle();

  /// Whether `actor` may follow `topic` on the realtime channel.
  bool can_subscribe(const Actor& actor, std::string_view topic) const;

  const ServerConfig& config() const noexcept { return config_; }
  const Clock& clock() const noexcept { return clock_; }
  store::DocumentStore& docs() noexcept { return docs_; }
  store::BlobStore& blobs() noexcept { return blobs_; }
  Hub& hub() noexcept { return hub_; }
  registry::Registry& registry() noexcept { return registry_; }
  chat::ChatService& chat() noexcept { return chat_; }
  marketplace::MarketplaceService& market() noexcept { return market_; }
  diagnosis::DiagnosisService& diagnosis() noexcept { return diagnosis_; }
  diagnosis::ModelSlot& models() noexcept { return *models_; }

 private:
  void enqueue(const std::string& request_id);
  void sweep_once();
  void sweeper_loop();

  ServerConfig config_;
  const Clock& clock_;
  store::DocumentStore docs_;
  store::BlobStore blobs_;
  Hub hub_;
  registry::Registry registry_;
  std::unique_ptr<diagnosis::ModelSlot> models_;
  chat::ChatService chat_;
  marketplace::MarketplaceService market_;
  diagnosis::DiagnosisService diagnosis_;

  std::unique_ptr<boost::asio::thread_pool> workers_;
  std::mutex jobs_mu_;
  std::condition_variable jobs_cv_;
  std::size_t jobs_pending_ = 0;
  std::map<std::string, Timestamp> last_attempt_;

  std::mutex sweeper_mu_;
  std::condition_variable sweeper_cv_;
  bool stopping_ = false;
  std::thread sweeper_;
};

}  // namespace fieldlink::gateway
