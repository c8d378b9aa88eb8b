#include "vignette/api/service.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <httplib.h>

#include "vignette/codec.hpp"
#include "vignette/util.hpp"

namespace vignette::api {

namespace fs = std::filesystem;

namespace {

std::string iso_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool safe_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const fs::path& p, const std::string& text) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, p);
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

Json envelope(const std::string& code, const std::string& message, Json details = Json::object()) {
  return {{"code", code}, {"message", message}, {"details", std::move(details)}};
}

int env_int(const char* name, int fallback) {
  const char* v = std::getenv(name);
  if (!v || !*v) return fallback;
  try {
    return std::stoi(v);
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string(name) + " must be an integer, got '" + v + "'");
  }
}

std::string required_string(const Json& body, const char* key) {
  if (!body.is_object() || !body.contains(key) || !body[key].is_string())
    throw ApiError(400, "BAD_REQUEST", std::string("body needs a string field '") + key + "'");
  return body[key].get<std::string>();
}

std::size_t query_size(const std::map<std::string, std::string>& q, const std::string& key, std::size_t fallback) {
  auto it = q.find(key);
  if (it == q.end()) return fallback;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(it->second, &used);
    if (used != it->second.size() || v < 0) throw std::invalid_argument(key);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ApiError(400, "BAD_REQUEST", "query parameter '" + key + "' must be a non-negative integer");
  }
}

}  // namespace

ServiceConfig ServiceConfig::from_env() {
  ServiceConfig c;
  if (const char* d = std::getenv("VIGNETTE_STORE_DIR"); d && *d) c.store_dir = d;
  c.tick_ms = env_int("VIGNETTE_TICK_MS", c.tick_ms);
  c.long_poll_ms = env_int("VIGNETTE_LONG_POLL_MS", c.long_poll_ms);
  c.runtime.seed = static_cast<std::uint64_t>(env_int("VIGNETTE_SEED", static_cast<int>(c.runtime.seed)));
  return c;
}

Json to_json(const StoredVignette& v) {
  return {{"id", v.id}, {"created_at", v.created_at}, {"updated_at", v.updated_at}, {"session", v.session.to_json()}};
}

StoredVignette stored_vignette_from_json(const Json& j) {
  return {j.at("id").get<std::string>(), extract::ExtractionSession::from_json(j.at("session")),
          j.value("created_at", ""), j.value("updated_at", "")};
}

FileStore::FileStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_ / "vignettes");
  fs::create_directories(session_dir());
}

fs::path FileStore::vignette_path(const std::string& id) const { return root_ / "vignettes" / (id + ".json"); }
fs::path FileStore::session_dir() const { return root_ / "sessions"; }

void FileStore::save(const StoredVignette& v) { write_atomic(vignette_path(v.id), canonical_dump(to_json(v))); }

std::optional<StoredVignette> FileStore::load(const std::string& id) const {
  if (!safe_id(id) || !fs::exists(vignette_path(id))) return std::nullopt;
  return stored_vignette_from_json(Json::parse(read_text(vignette_path(id))));
}

std::vector<StoredVignette> FileStore::load_all() const {
  std::vector<StoredVignette> out;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(root_ / "vignettes"))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      out.push_back(stored_vignette_from_json(Json::parse(read_text(f))));
    } catch (const std::exception& e) {
      throw std::runtime_error(f.string() + ": " + e.what());
    }
  }
  return out;
}

void FileStore::save_session_meta(const std::string& session_id, const Json& meta) {
  write_atomic(session_dir() / (session_id + ".json"), canonical_dump(meta));
}

std::optional<Json> FileStore::load_session_meta(const std::string& session_id) const {
  const fs::path p = session_dir() / (session_id + ".json");
  if (!safe_id(session_id) || !fs::exists(p)) return std::nullopt;
  return Json::parse(read_text(p));
}

void FileStore::append_log(const std::string& session_id, const std::vector<runtime::LogRecord>& records) {
  if (records.empty()) return;
  std::ofstream out(session_dir() / (session_id + ".ndjson"), std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot append to the log of session " + session_id);
  out << runtime::to_ndjson(records);
}

std::vector<runtime::LogRecord> FileStore::read_log(const std::string& session_id) const {
  const fs::path p = session_dir() / (session_id + ".ndjson");
  if (!safe_id(session_id) || !fs::exists(p)) return {};
  return runtime::parse_ndjson(read_text(p));
}

Service::Service(ServiceConfig config, std::shared_ptr<llm::Gateway> gateway)
    : config_(std::move(config)), gateway_(std::move(gateway)), store_(config_.store_dir) {
  if (!gateway_) throw std::invalid_argument("service needs a gateway");
  for (auto& v : store_.load_all()) {
    auto s = std::make_shared<VignetteSlot>();
    const std::string id = v.id;
    s->v = std::move(v);
    vignettes_[id] = std::move(s);
  }
}

Service::~Service() { shutdown(); }

void Service::shutdown() {
  std::vector<std::shared_ptr<LiveSession>> live;
  {
    std::lock_guard lk(registry_mutex_);
    stopping_ = true;
    for (auto& [id, s] : sessions_) live.push_back(s);
  }
  for (auto& s : live) {
    std::thread loop;
    {
      std::lock_guard lk(s->mutex);
      s->closed = true;
      loop = std::move(s->loop);
    }
    s->changed.notify_all();
    if (loop.joinable()) loop.join();
  }
}

std::string Service::new_id(const std::string& prefix) {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lk(registry_mutex_);
  for (;;) {
    std::string id = prefix + hex64(rng() ^ ++id_counter_).substr(0, 12);
    if (!vignettes_.count(id) && !sessions_.count(id) && !store_.load_session_meta(id)) return id;
  }
}

std::shared_ptr<Service::VignetteSlot> Service::slot(const std::string& id) {
  std::lock_guard lk(registry_mutex_);
  auto it = vignettes_.find(id);
  if (it == vignettes_.end()) throw ApiError(404, "NOT_FOUND", "no vignette '" + id + "'");
  return it->second;
}

std::shared_ptr<Service::LiveSession> Service::session(const std::string& sid) {
  std::lock_guard lk(registry_mutex_);
  auto it = sessions_.find(sid);
  if (it == sessions_.end()) throw ApiError(404, "NOT_FOUND", "no live session '" + sid + "'");
  return it->second;
}

Json Service::describe(const StoredVignette& v) const {
  const auto& d = v.session.draft();
  Json characters = Json::array();
  for (const auto& c : d.characters) characters.push_back(vignette::to_json(c));
  Json rooms = Json::array();
  for (const auto& r : d.environment.rooms) rooms.push_back({{"id", r.id}, {"label", r.label}});
  Json flags = Json::array();
  for (const auto& f : v.session.flags()) flags.push_back(extract::to_json(f));
  return {{"id", v.id},
          {"stage", std::string(extract::to_string(v.session.stage()))},
          {"created_at", v.created_at},
          {"updated_at", v.updated_at},
          {"caption", d.story_text},
          {"layout", d.environment.layout_id},
          {"rooms", rooms},
          {"characters", characters},
          {"flags", flags},
          {"draft", spec_to_json(d)}};
}

Json Service::create_vignette(const Json& body) {
  const std::string story = required_string(body, "story");
  StoredVignette v{new_id("v"), extract::ExtractionSession::create(*gateway_, story, config_.extractor), iso_now(), ""};
  v.updated_at = v.created_at;
  store_.save(v);
  Json out = describe(v);
  auto s = std::make_shared<VignetteSlot>();
  s->v = std::move(v);
  std::lock_guard lk(registry_mutex_);
  vignettes_[s->v.id] = s;
  return out;
}

Json Service::import_vignette(const Json& body) {
  if (!body.is_object() || !body.contains("spec")) throw ApiError(400, "BAD_REQUEST", "body needs a 'spec' document");
  const VignetteSpec spec = decode_spec(body["spec"].is_string() ? body["spec"].get<std::string>() : body["spec"].dump());
  StoredVignette v{new_id("v"),
                   extract::ExtractionSession::from_json({{"stage", "complete"}, {"draft", spec_to_json(spec)}}),
                   iso_now(), ""};
  v.updated_at = v.created_at;
  store_.save(v);
  Json out = describe(v);
  auto s = std::make_shared<VignetteSlot>();
  s->v = std::move(v);
  std::lock_guard lk(registry_mutex_);
  vignettes_[s->v.id] = s;
  return out;
}

Json Service::list_vignettes() {
  std::vector<std::shared_ptr<VignetteSlot>> all;
  {
    std::lock_guard lk(registry_mutex_);
    for (auto& [id, s] : vignettes_) all.push_back(s);
  }
  Json out = Json::array();
  for (auto& s : all) {
    std::lock_guard lk(s->mutex);
    out.push_back({{"id", s->v.id},
                   {"stage", std::string(extract::to_string(s->v.session.stage()))},
                   {"title", s->v.session.draft().title},
                   {"updated_at", s->v.updated_at}});
  }
  return {{"vignettes", out}};
}

Json Service::get_vignette(const std::string& id) {
  auto s = slot(id);
  std::lock_guard lk(s->mutex);
  return describe(s->v);
}

Json Service::edit_vignette(const std::string& id, const std::string& action, const Json& body) {
  auto s = slot(id);
  std::lock_guard lk(s->mutex);
  // edits run on a copy so a failed step leaves the stored draft untouched
  extract::ExtractionSession work = s->v.session;
  if (action == "rooms") {
    std::map<std::string, std::string> labels;
    if (body.is_object() && body.contains("labels")) labels = body["labels"].get<std::map<std::string, std::string>>();
    work.confirm_rooms(*gateway_, labels);
  } else if (action == "environment") {
    work.update_environment(*gateway_, body.is_object() && body.contains("ops") ? body["ops"] : body);
  } else if (action == "objects/confirm") {
    work.confirm_objects();
  } else if (action == "characters/confirm") {
    work.confirm_characters();
  } else if (action == "events") {
    work.update_events(body.is_object() && body.contains("ops") ? body["ops"] : body);
  } else if (action == "events/confirm") {
    work.confirm_events();
  } else {
    throw ApiError(404, "NOT_FOUND", "unknown vignette action '" + action + "'");
  }
  StoredVignette next{s->v.id, std::move(work), s->v.created_at, iso_now()};
  store_.save(next);
  s->v = std::move(next);
  return describe(s->v);
}

Json Service::edit_character(const std::string& id, const std::string& character_id, const std::string& action, const Json& body) {
  auto s = slot(id);
  std::lock_guard lk(s->mutex);
  if (!s->v.session.draft().find_character(character_id))
    throw ApiError(404, "NOT_FOUND", "no character '" + character_id + "' in vignette '" + id + "'");
  extract::ExtractionSession work = s->v.session;
  Json extra = Json::object();
  if (action == "update") {
    work.update_character(character_id, body);
  } else if (action == "suggestions") {
    Json sug = Json::object();
    for (const auto& [field, value] : work.suggest_persona(*gateway_, character_id)) sug[field] = value;
    return {{"character_id", character_id}, {"suggestions", sug}};
  } else if (action == "suggestions/accept") {
    work.accept_suggestion(character_id, required_string(body, "field"), required_string(body, "value"));
  } else if (action == "chat") {
    std::optional<std::string> edited;
    if (body.contains("edited_reply") && body["edited_reply"].is_string()) edited = body["edited_reply"].get<std::string>();
    extra["reply"] = work.simulate_chat(*gateway_, character_id, required_string(body, "utterance"), edited);
  } else {
    throw ApiError(404, "NOT_FOUND", "unknown character action '" + action + "'");
  }
  StoredVignette next{s->v.id, std::move(work), s->v.created_at, iso_now()};
  store_.save(next);
  s->v = std::move(next);
  Json out = describe(s->v);
  out.update(extra);
  return out;
}

Json Service::create_session(const Json& body) {
  const std::string vid = required_string(body, "vignette_id");
  const std::string mode_name = body.value("mode", "cd");
  auto mode = planner::parse_mode(mode_name);
  if (!mode) throw ApiError(400, "BAD_REQUEST", "mode must be one of cd, po, so, bl");
  VignetteSpec spec;
  {
    auto s = slot(vid);
    std::lock_guard lk(s->mutex);
    if (s->v.session.stage() != extract::Stage::complete)
      throw ApiError(409, "INCOMPLETE", "vignette '" + vid + "' is at stage " + std::string(extract::to_string(s->v.session.stage())) +
                                            "; confirm the events first");
    spec = s->v.session.draft();
  }
  auto live = std::make_shared<LiveSession>();
  live->id = new_id("s");
  live->vignette_id = vid;
  live->mode = *mode;
  live->caption = spec.story_text;
  live->created_at = iso_now();
  runtime::RuntimeConfig rc = config_.runtime;
  rc.mode = *mode;
  live->rt = std::make_unique<runtime::Runtime>(std::move(spec), *gateway_, rc);
  store_.save_session_meta(live->id, {{"id", live->id},
                                      {"vignette_id", vid},
                                      {"mode", std::string(planner::to_string(*mode))},
                                      {"created_at", live->created_at}});
  Json state;
  {
    std::lock_guard lk(live->mutex);
    persist_new_records(*live);
    state = runtime::to_json(live->rt->world());
  }
  {
    std::lock_guard lk(registry_mutex_);
    if (stopping_) throw ApiError(503, "SHUTTING_DOWN", "service is shutting down");
    sessions_[live->id] = live;
  }
  if (config_.tick_ms > 0) live->loop = std::thread([this, live] { run_loop(live); });
  return {{"session_id", live->id},
          {"vignette_id", vid},
          {"mode", std::string(planner::to_string(*mode))},
          {"caption", live->caption},
          {"state", state}};
}

void Service::persist_new_records(LiveSession& s) {
  const auto& log = s.rt->log();
  if (s.persisted >= log.size()) return;
  store_.append_log(s.id, std::vector<runtime::LogRecord>(log.begin() + static_cast<std::ptrdiff_t>(s.persisted), log.end()));
  s.persisted = log.size();
}

void Service::run_loop(const std::shared_ptr<LiveSession>& s) {
  std::unique_lock lk(s->mutex);
  while (!s->closed && !s->rt->ended()) {
    s->changed.wait_for(lk, std::chrono::milliseconds(config_.tick_ms), [&] { return s->closed; });
    if (s->closed) break;
    try {
      s->rt->step();
      persist_new_records(*s);
    } catch (const std::exception& e) {
      std::cerr << "session " << s->id << " stopped: " << e.what() << "\n";
      s->closed = true;
    }
    s->changed.notify_all();
  }
  s->changed.notify_all();
}

namespace {

std::string session_status(bool closed, const runtime::Runtime& rt) {
  if (rt.ended()) return "ended";
  return closed ? "closed" : "running";
}

}  // namespace

Json Service::post_command(const std::string& sid, const Json& body) {
  auto s = session(sid);
  std::lock_guard lk(s->mutex);
  if (s->closed || s->rt->ended())
    throw ApiError(410, "SESSION_ENDED", "session '" + sid + "' is " + session_status(s->closed, *s->rt));
  runtime::ViewerCommand cmd = runtime::command_from_json(body);
  cmd.at_tick = s->rt->world().tick;
  s->rt->enqueue(cmd);
  s->changed.notify_all();
  return {{"accepted", true}, {"tick", cmd.at_tick}, {"queued", s->rt->queued()}};
}

Json Service::get_state(const std::string& sid, const std::map<std::string, std::string>& query) {
  auto s = session(sid);
  const bool by_tick = query.count("since_tick") && !query.count("since");
  const std::size_t since = query_size(query, "since", 0);
  const std::size_t since_tick = query_size(query, "since_tick", 0);
  const auto wait = std::chrono::milliseconds(std::min<std::size_t>(query_size(query, "wait_ms", 0), config_.long_poll_ms));
  std::unique_lock lk(s->mutex);
  auto has_news = [&] {
    const auto& log = s->rt->log();
    if (s->closed || s->rt->ended()) return true;
    if (by_tick) return !log.empty() && log.back().tick >= static_cast<int>(since_tick);
    return log.size() > since;
  };
  if (wait.count() > 0) s->changed.wait_for(lk, wait, has_news);
  const auto& log = s->rt->log();
  Json records = Json::array();
  std::size_t start = since;
  if (by_tick) {
    start = 0;
    while (start < log.size() && log[start].tick < static_cast<int>(since_tick)) ++start;
  }
  for (std::size_t i = start; i < log.size(); ++i) records.push_back(runtime::to_json(log[i]));
  return {{"session_id", sid},
          {"tick", s->rt->world().tick},
          {"status", session_status(s->closed, *s->rt)},
          {"world", runtime::to_json(s->rt->world())},
          {"records", records},
          {"next", log.size()}};
}

Json Service::advance_session(const std::string& sid, const Json& body) {
  auto s = session(sid);
  const int ticks = body.is_object() ? body.value("ticks", 1) : 1;
  if (ticks < 1 || ticks > 100000) throw ApiError(400, "BAD_REQUEST", "ticks must lie in 1..100000");
  std::lock_guard lk(s->mutex);
  if (s->closed) throw ApiError(410, "SESSION_ENDED", "session '" + sid + "' is closed");
  for (int i = 0; i < ticks && !s->rt->ended(); ++i) s->rt->step();
  persist_new_records(*s);
  s->changed.notify_all();
  return {{"session_id", sid}, {"tick", s->rt->world().tick}, {"status", session_status(s->closed, *s->rt)}, {"next", s->rt->log().size()}};
}

Json Service::close_session(const std::string& sid) {
  auto s = session(sid);
  std::thread loop;
  {
    std::lock_guard lk(s->mutex);
    s->closed = true;
    persist_new_records(*s);
    loop = std::move(s->loop);
  }
  s->changed.notify_all();
  if (loop.joinable()) loop.join();
  std::lock_guard lk(s->mutex);
  return {{"session_id", sid}, {"status", session_status(true, *s->rt)}};
}

Json Service::session_log(const std::string& sid) {
  std::shared_ptr<LiveSession> live;
  {
    std::lock_guard lk(registry_mutex_);
    if (auto it = sessions_.find(sid); it != sessions_.end()) live = it->second;
  }
  Json records = Json::array();
  if (live) {
    std::lock_guard lk(live->mutex);
    for (const auto& r : live->rt->log()) records.push_back(runtime::to_json(r));
    return {{"session_id", sid}, {"records", records}};
  }
  if (!store_.load_session_meta(sid)) throw ApiError(404, "NOT_FOUND", "no session '" + sid + "'");
  for (const auto& r : store_.read_log(sid)) records.push_back(runtime::to_json(r));
  return {{"session_id", sid}, {"records", records}};
}

Response Service::handle(const std::string& method, const std::string& path, const Json& body,
                         const std::map<std::string, std::string>& query) {
  try {
    auto seg = split_path(path);
    if (seg.size() < 2 || seg[0] != "api" || seg[1] != "v1") throw ApiError(404, "NOT_FOUND", "no route " + path);
    seg.erase(seg.begin(), seg.begin() + 2);
    const std::size_t n = seg.size();
    auto rest = [&](std::size_t from) {
      std::string out;
      for (std::size_t i = from; i < n; ++i) out += (out.empty() ? "" : "/") + seg[i];
      return out;
    };

    if (n == 1 && seg[0] == "health" && method == "GET") return {200, {{"status", "ok"}, {"provider", gateway_->provider().id()}}};
    if (n >= 1 && seg[0] == "vignettes") {
      if (n == 1 && method == "GET") return {200, list_vignettes()};
      if (n == 1 && method == "POST") return {201, create_vignette(body)};
      if (n == 2 && seg[1] == "import" && method == "POST") return {201, import_vignette(body)};
      if (n == 2 && method == "GET") return {200, get_vignette(seg[1])};
      if (n == 3 && seg[2] == "spec" && method == "GET") return {200, get_vignette(seg[1])["draft"]};
      if (n >= 4 && seg[2] == "characters" && seg[3] != "confirm") {
        if (n == 4 && method == "PATCH") return {200, edit_character(seg[1], seg[3], "update", body)};
        if (n > 4 && method == "POST") return {200, edit_character(seg[1], seg[3], rest(4), body)};
      }
      if (n >= 3 && method == "POST") return {200, edit_vignette(seg[1], rest(2), body)};
    }
    if (n >= 1 && seg[0] == "sessions") {
      if (n == 1 && method == "POST") return {201, create_session(body)};
      if (n == 2 && method == "DELETE") return {200, close_session(seg[1])};
      if (n == 3 && seg[2] == "state" && method == "GET") return {200, get_state(seg[1], query)};
      if (n == 3 && seg[2] == "commands" && method == "POST") return {202, post_command(seg[1], body)};
      if (n == 3 && seg[2] == "advance" && method == "POST") return {200, advance_session(seg[1], body)};
      if (n == 3 && seg[2] == "log" && method == "GET") return {200, session_log(seg[1])};
    }
    throw ApiError(404, "NOT_FOUND", "no route " + method + " " + path);
  } catch (const ApiError& e) {
    return {e.status(), envelope(e.code(), e.what(), e.details())};
  } catch (const extract::StageError& e) {
    return {409, envelope("STAGE_CONFLICT", e.what(), {{"stage", std::string(extract::to_string(e.actual()))}})};
  } catch (const extract::EditRejected& e) {
    return {422, envelope("INVALID_EDIT", e.what(), vignette::to_json(e.report()))};
  } catch (const extract::ExtractionError& e) {
    int status = 422;
    if (e.code() == "EMPTY_STORY") status = 400;
    if (e.code() == "LLM_FAILURE") status = 502;
    return {status, envelope(e.code(), e.what(), e.details())};
  } catch (const InvalidSpecError& e) {
    return {422, envelope("INVALID_SPEC", e.what(), vignette::to_json(e.report()))};
  } catch (const runtime::InitError& e) {
    return {422, envelope("NOT_RUNNABLE", e.what(), vignette::to_json(e.report()))};
  } catch (const SpecError& e) {
    return {400, envelope("BAD_SPEC", e.what())};
  } catch (const Json::exception& e) {
    return {400, envelope("BAD_REQUEST", e.what())};
  } catch (const std::invalid_argument& e) {
    return {400, envelope("BAD_REQUEST", e.what())};
  } catch (const std::exception& e) {
    return {500, envelope("INTERNAL", e.what())};
  }
}

void Service::mount(httplib::Server& server) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    Json body = Json::object();
    if (!req.body.empty()) {
      try {
        body = Json::parse(req.body);
      } catch (const Json::exception& e) {
        res.status = 400;
        res.set_content(envelope("INVALID_JSON", e.what()).dump(), "application/json");
        return;
      }
    }
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query[k] = v;
    Response r = handle(req.method, req.path, body, query);
    res.status = r.status;
    res.set_content(r.body.dump(-1, ' ', false, Json::error_handler_t::replace), "application/json");
  };
  const char* pattern = R"(/api/v1/.*)";
  server.Get(pattern, handler);
  server.Post(pattern, handler);
  server.Patch(pattern, handler);
  server.Put(pattern, handler);
  server.Delete(pattern, handler);
  server.Options(pattern, [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, PATCH, PUT, DELETE, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
}

}  // namespace vignette::api
