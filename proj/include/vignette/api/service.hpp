#pragma once

#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "vignette/extract/extractor.hpp"
#include "vignette/llm/gateway.hpp"
#include "vignette/runtime/runtime.hpp"

namespace httplib {
class Server;
}

namespace vignette::api {

using Json = nlohmann::json;

/// Becomes an error envelope {code, message, details} with the given HTTP status.
class ApiError : public std::runtime_error {
 public:
  ApiError(int status, std::string code, const std::string& message, Json details = Json::object())
      : std::runtime_error(message), status_(status), code_(std::move(code)), details_(std::move(details)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }
  const Json& details() const { return details_; }

 private:
  int status_;
  std::string code_;
  Json details_;
};

struct ServiceConfig {
  std::filesystem::path store_dir = "vignette-store";
  int tick_ms = 100;         // wall-clock tick length of live sessions; 0 = sessions only advance on request
  int long_poll_ms = 20000;  // upper bound for get_state waits
  runtime::RuntimeConfig runtime;
  extract::ExtractorConfig extractor;

  /// VIGNETTE_STORE_DIR, VIGNETTE_TICK_MS, VIGNETTE_LONG_POLL_MS, VIGNETTE_SEED.
  static ServiceConfig from_env();
};

struct StoredVignette {
  std::string id;
  extract::ExtractionSession session;
  std::string created_at;
  std::string updated_at;
};

Json to_json(const StoredVignette& v);
StoredVignette stored_vignette_from_json(const Json& j);

/// One JSON document per vignette plus an append-only NDJSON log per session.
class FileStore {
 public:
  explicit FileStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  void save(const StoredVignette& v);  // write-then-rename
  std::optional<StoredVignette> load(const std::string& id) const;
  std::vector<StoredVignette> load_all() const;

  void save_session_meta(const std::string& session_id, const Json& meta);
  std::optional<Json> load_session_meta(const std::string& session_id) const;
  void append_log(const std::string& session_id, const std::vector<runtime::LogRecord>& records);
  std::vector<runtime::LogRecord> read_log(const std::string& session_id) const;

 private:
  std::filesystem::path vignette_path(const std::string& id) const;
  std::filesystem::path session_dir() const;

  std::filesystem::path root_;
};

struct Response {
  int status = 200;
  Json body = Json::object();
};

/// Authoring pipeline and live viewing sessions behind /api/v1 routes.
class Service {
 public:
  Service(ServiceConfig config, std::shared_ptr<llm::Gateway> gateway);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Transport-independent dispatch. Never throws; failures come back as error envelopes.
  Response handle(const std::string& method, const std::string& path, const Json& body = Json::object(),
                  const std::map<std::string, std::string>& query = {});
  /// Routes every /api/v1 request through handle().
  void mount(httplib::Server& server);

  const ServiceConfig& config() const { return config_; }
  /// Stops all session loops. Further session calls answer 410.
  void shutdown();

 private:
  struct VignetteSlot {
    std::mutex mutex;
    StoredVignette v;
  };
  struct LiveSession {
    std::string id;
    std::string vignette_id;
    planner::Mode mode = planner::Mode::CD;
    std::string caption;
    std::string created_at;
    std::unique_ptr<runtime::Runtime> rt;
    std::mutex mutex;
    std::condition_variable changed;
    std::thread loop;
    bool closed = false;
    std::size_t persisted = 0;
  };

  Json create_vignette(const Json& body);
  Json import_vignette(const Json& body);
  Json list_vignettes();
  Json get_vignette(const std::string& id);
  Json edit_vignette(const std::string& id, const std::string& action, const Json& body);
  Json edit_character(const std::string& id, const std::string& character_id, const std::string& action, const Json& body);
  Json create_session(const Json& body);
  Json post_command(const std::string& sid, const Json& body);
  Json get_state(const std::string& sid, const std::map<std::string, std::string>& query);
  Json advance_session(const std::string& sid, const Json& body);
  Json close_session(const std::string& sid);
  Json session_log(const std::string& sid);

  std::shared_ptr<VignetteSlot> slot(const std::string& id);
  std::shared_ptr<LiveSession> session(const std::string& sid);
  Json describe(const StoredVignette& v) const;
  void persist_new_records(LiveSession& s);  // caller holds s.mutex
  void run_loop(const std::shared_ptr<LiveSession>& s);
  std::string new_id(const std::string& prefix);

  ServiceConfig config_;
  std::shared_ptr<llm::Gateway> gateway_;
  FileStore store_;
  std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<VignetteSlot>> vignettes_;
  std::map<std::string, std::shared_ptr<LiveSession>> sessions_;
  bool stopping_ = false;
  std::uint64_t id_counter_ = 0;
};

}  // namespace vignette::api
