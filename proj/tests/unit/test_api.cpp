#include <chrono>
#include <random>

#include <httplib.h>

#include "doctest.h"
#include "fixtures.hpp"
#include "vignette/api/service.hpp"
#include "vignette/codec.hpp"
#include "vignette/extract/extractor.hpp"
#include "vignette/harness/harness.hpp"
#include "vignette/llm/mock.hpp"

using namespace vignette;
using api::Json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("vignette-api-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::shared_ptr<llm::Gateway> gateway_file(const std::string& name) {
  return std::make_shared<llm::Gateway>(llm::ScriptedMock::from_file(fx::source_dir() / "scenarios/kelly" / name));
}

std::shared_ptr<llm::Gateway> gateway_json(const Json& script) {
  return std::make_shared<llm::Gateway>(std::make_shared<llm::ScriptedMock>(llm::MockScript::from_json(script)));
}

api::ServiceConfig config_for(const fs::path& dir, int tick_ms = 0) {
  api::ServiceConfig c;
  c.store_dir = dir;
  c.tick_ms = tick_ms;
  c.long_poll_ms = 2000;
  return c;
}

std::string kelly_story() {
  std::string s = fx::read_file(fx::source_dir() / "scenarios/kelly/story.txt");
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

void check_envelope(const api::Response& r, int status, const std::string& code) {
  INFO(r.body.dump());
  CHECK(r.status == status);
  CHECK(r.body.value("code", "") == code);
  CHECK(r.body.contains("message"));
  CHECK(r.body.contains("details"));
}

// Kelly with no player parts: the NPCs finish every event on their own.
VignetteSpec npc_only_spec() {
  VignetteSpec spec = fx::kelly_spec();
  for (auto& ev : spec.key_events)
    ev.activities.erase(std::remove_if(ev.activities.begin(), ev.activities.end(), [](const ActivityTuple& a) { return a.character_id == "kelly"; }),
                        ev.activities.end());
  extract::sync_object_kinds(spec);
  return spec;
}

std::string import(api::Service& svc, const VignetteSpec& spec) {
  auto r = svc.handle("POST", "/api/v1/vignettes/import", {{"spec", encode_spec(spec)}});
  INFO(r.body.dump());
  REQUIRE(r.status == 201);
  return r.body["id"].get<std::string>();
}

}  // namespace

TEST_CASE("authoring checkpoints over the api") {
  TempDir dir;
  auto gw = gateway_file("extraction_mock.json");
  Json before;
  std::string id;
  {
    api::Service svc(config_for(dir.path), gw);
    check_envelope(svc.handle("POST", "/api/v1/vignettes", {{"story", ""}}), 400, "EMPTY_STORY");
    check_envelope(svc.handle("POST", "/api/v1/vignettes", Json::object()), 400, "BAD_REQUEST");

    auto r = svc.handle("POST", "/api/v1/vignettes", {{"story", kelly_story()}});
    INFO(r.body.dump());
    REQUIRE(r.status == 201);
    id = r.body["id"].get<std::string>();
    CHECK(r.body["stage"] == "rooms_pending");
    CHECK(r.body["layout"] == "residential_home");
    CHECK(r.body["characters"].size() == 3);
    CHECK(r.body["caption"] == kelly_story());

    check_envelope(svc.handle("POST", "/api/v1/vignettes/" + id + "/objects/confirm"), 409, "STAGE_CONFLICT");
    check_envelope(svc.handle("POST", "/api/v1/sessions", {{"vignette_id", id}, {"mode", "cd"}}), 409, "INCOMPLETE");
    check_envelope(svc.handle("GET", "/api/v1/vignettes/nope"), 404, "NOT_FOUND");

    r = svc.handle("POST", "/api/v1/vignettes/" + id + "/rooms", {{"labels", Json::object()}});
    REQUIRE(r.status == 200);
    CHECK(r.body["stage"] == "objects_pending");

    // stove onto the fridge's tiles
    Json fridge;
    for (const auto& o : r.body["draft"]["environment"]["objects"])
      if (o["room_id"] == r.body["draft"]["environment"]["objects"][0]["room_id"] && o["id"] != "stove") fridge = o;
    Json stove_pos;
    for (const auto& o : r.body["draft"]["environment"]["objects"])
      if (o["id"] == "stove") stove_pos = o["position"];
    REQUIRE(fridge.is_object());
    auto bad = svc.handle("POST", "/api/v1/vignettes/" + id + "/environment",
                          {{"ops", Json::array({{{"op", "move"}, {"object_id", "stove"}, {"position", fridge["position"]}}})}});
    check_envelope(bad, 422, "INVALID_EDIT");
    bool overlap = false;
    for (const auto& v : bad.body["details"]["violations"]) overlap = overlap || v["code"] == "OVERLAP";
    CHECK(overlap);
    r = svc.handle("GET", "/api/v1/vignettes/" + id);
    for (const auto& o : r.body["draft"]["environment"]["objects"])
      if (o["id"] == "stove") CHECK(o["position"] == stove_pos);

    Json ops = Json::array({{{"op", "add"}, {"name", "dining chair"}, {"room_id", "r1"}}, {{"op", "add"}, {"name", "chair"}, {"room_id", "r1"}}});
    r = svc.handle("POST", "/api/v1/vignettes/" + id + "/environment", {{"ops", ops}});
    INFO(r.body.dump());
    REQUIRE(r.status == 200);
    REQUIRE(svc.handle("POST", "/api/v1/vignettes/" + id + "/objects/confirm").status == 200);

    r = svc.handle("PATCH", "/api/v1/vignettes/" + id + "/characters/me", {{"name", "Kelly"}});
    REQUIRE(r.status == 200);
    r = svc.handle("POST", "/api/v1/vignettes/" + id + "/characters/julie/chat", {{"utterance", "How much spice should I add?"}});
    REQUIRE(r.status == 200);
    CHECK(r.body["reply"] == "Just a pinch or to taste!");
    REQUIRE(svc.handle("POST", "/api/v1/vignettes/" + id + "/characters/jack/chat", {{"utterance", "Hey Jack, ready for dinner?"}}).status == 200);
    r = svc.handle("POST", "/api/v1/vignettes/" + id + "/characters/jack/suggestions");
    REQUIRE(r.status == 200);
    CHECK(r.body["suggestions"]["personality"] == "supportive");
    r = svc.handle("POST", "/api/v1/vignettes/" + id + "/characters/jack/suggestions/accept", {{"field", "personality"}, {"value", "supportive"}});
    REQUIRE(r.status == 200);
    check_envelope(svc.handle("PATCH", "/api/v1/vignettes/" + id + "/characters/ghost", {{"name", "x"}}), 404, "NOT_FOUND");
    REQUIRE(svc.handle("POST", "/api/v1/vignettes/" + id + "/characters/confirm").status == 200);

    Json evops = Json::array({{{"op", "set_activity"}, {"event", 0}, {"character_id", "me"}, {"action", "cooking dinner"}},
                              {{"op", "set_activity"}, {"event", 1}, {"character_id", "julie"}, {"object_id", "dining_chair"}},
                              {{"op", "add_activity"}, {"event", 1}, {"character_id", "jack"}, {"action", "having dinner"}, {"object_id", "chair_2"}}});
    REQUIRE(svc.handle("POST", "/api/v1/vignettes/" + id + "/events", {{"ops", evops}}).status == 200);
    r = svc.handle("POST", "/api/v1/vignettes/" + id + "/events/confirm");
    REQUIRE(r.status == 200);
    CHECK(r.body["stage"] == "complete");
    before = svc.handle("GET", "/api/v1/vignettes/" + id).body;
  }

  SUBCASE("a restarted service reloads every vignette") {
    api::Service again(config_for(dir.path), gw);
    auto r = again.handle("GET", "/api/v1/vignettes/" + id);
    REQUIRE(r.status == 200);
    CHECK(r.body == before);
    CHECK(again.handle("GET", "/api/v1/vignettes").body["vignettes"].size() == 1);
    r = again.handle("POST", "/api/v1/sessions", {{"vignette_id", id}, {"mode", "po"}});
    CHECK(r.status == 201);
  }
}

TEST_CASE("character cap is reported as 422") {
  TempDir dir;
  Json blank = {{"age", nullptr}, {"personality", nullptr}, {"social_role", nullptr}, {"mood", nullptr}, {"language_style", nullptr}};
  Json chars = Json::array();
  for (auto [name, role] : std::vector<std::pair<std::string, std::string>>{{"me", "PC"}, {"Ann", "NPC"}, {"Bea", "NPC"}, {"Cal", "NPC"}, {"Dan", "NPC"}}) {
    Json c = blank;
    c["name"] = name;
    c["role"] = role;
    chars.push_back(c);
  }
  auto gw = gateway_json({{"entries", Json::array({{{"template", "EXTRACT_CHARACTERS"}, {"when", Json::object()},
                                                    {"response", {{"characters", chars}, {"flags", Json::array()}}}}})}});
  api::Service svc(config_for(dir.path), gw);
  auto r = svc.handle("POST", "/api/v1/vignettes", {{"story", "I met my friends Ann, Bea, Cal and Dan at the park."}});
  check_envelope(r, 422, "CAP_EXCEEDED");
  CHECK(r.body["details"]["characters"].size() == 5);
  CHECK(svc.handle("GET", "/api/v1/vignettes").body["vignettes"].empty());
}

TEST_CASE("concatenated state deltas equal the runtime log") {
  TempDir dir;
  const auto spec = fx::kelly_spec();
  auto gw = gateway_file("runtime_mock.json");
  const auto trace =
      harness::record_script(spec, *gw, harness::script_from_json(Json::parse(fx::read_file(fx::source_dir() / "scenarios/kelly/viewer_script.json"))));
  const auto direct = harness::run_trace(spec, trace, *gateway_file("runtime_mock.json"));
  REQUIRE(direct.ok());

  api::Service svc(config_for(dir.path), gw);
  const std::string vid = import(svc, spec);
  auto r = svc.handle("POST", "/api/v1/sessions", {{"vignette_id", vid}, {"mode", "cd"}});
  REQUIRE(r.status == 201);
  const std::string sid = r.body["session_id"].get<std::string>();
  CHECK(r.body["caption"] == spec.story_text);
  CHECK(r.body["state"]["glow"] == Json({"stove"}));

  std::vector<runtime::LogRecord> wire;
  std::size_t next = 0;
  auto drain = [&] {
    auto s = svc.handle("GET", "/api/v1/sessions/" + sid + "/state", {}, {{"since", std::to_string(next)}});
    REQUIRE(s.status == 200);
    for (const auto& rec : s.body["records"]) wire.push_back(runtime::record_from_json(rec));
    next = s.body["next"].get<std::size_t>();
    return s.body;
  };
  int tick = 0;
  for (const auto& cmd : trace.commands) {
    if (cmd.at_tick > tick) {
      REQUIRE(svc.handle("POST", "/api/v1/sessions/" + sid + "/advance", {{"ticks", cmd.at_tick - tick}}).status == 200);
      tick = cmd.at_tick;
      drain();
    }
    auto a = svc.handle("POST", "/api/v1/sessions/" + sid + "/commands", runtime::to_json(cmd));
    REQUIRE(a.status == 202);
    CHECK(a.body["tick"] == tick);
  }
  Json last = Json::object();
  for (int i = 0; i < 50 && last.value("status", "") != "ended"; ++i) {
    svc.handle("POST", "/api/v1/sessions/" + sid + "/advance", {{"ticks", 100}});
    last = drain();
  }
  REQUIRE(last["status"] == "ended");
  CHECK(runtime::to_ndjson(wire) == runtime::to_ndjson(direct.log));

  // since_tick replay from the start, and the persisted log, match too
  auto all = svc.handle("GET", "/api/v1/sessions/" + sid + "/state", {}, {{"since_tick", "0"}});
  CHECK(all.body["records"].size() == direct.log.size());
  auto tail = svc.handle("GET", "/api/v1/sessions/" + sid + "/state", {}, {{"since_tick", std::to_string(direct.log.back().tick)}});
  CHECK(tail.body["records"].back() == runtime::to_json(direct.log.back()));
  check_envelope(svc.handle("POST", "/api/v1/sessions/" + sid + "/commands", {{"kind", "move"}, {"direction", "N"}}), 410, "SESSION_ENDED");
  CHECK(api::FileStore(dir.path).read_log(sid).size() == direct.log.size());
  CHECK(runtime::to_ndjson(api::FileStore(dir.path).read_log(sid)) == runtime::to_ndjson(direct.log));
}

TEST_CASE("session errors") {
  TempDir dir;
  api::Service svc(config_for(dir.path), gateway_file("runtime_mock.json"));
  const std::string vid = import(svc, npc_only_spec());
  check_envelope(svc.handle("POST", "/api/v1/sessions", {{"vignette_id", vid}, {"mode", "xx"}}), 400, "BAD_REQUEST");
  check_envelope(svc.handle("POST", "/api/v1/sessions", {{"vignette_id", "missing"}}), 404, "NOT_FOUND");
  check_envelope(svc.handle("GET", "/api/v1/sessions/missing/state"), 404, "NOT_FOUND");
  check_envelope(svc.handle("POST", "/api/v1/sessions/missing/commands", {{"kind", "wait"}}), 404, "NOT_FOUND");
  check_envelope(svc.handle("POST", "/api/v1/vignettes/import", {{"spec", "{not json"}}), 400, "BAD_SPEC");
  auto broken = spec_to_json(fx::kelly_spec());
  broken["characters"].push_back(broken["characters"][1]);
  check_envelope(svc.handle("POST", "/api/v1/vignettes/import", {{"spec", broken}}), 422, "INVALID_SPEC");

  auto r = svc.handle("POST", "/api/v1/sessions", {{"vignette_id", vid}, {"mode", "bl"}});
  REQUIRE(r.status == 201);
  const std::string sid = r.body["session_id"];
  check_envelope(svc.handle("POST", "/api/v1/sessions/" + sid + "/commands", {{"kind", "fly"}}), 400, "BAD_REQUEST");
  check_envelope(svc.handle("GET", "/api/v1/sessions/" + sid + "/state", {}, {{"since", "-3"}}), 400, "BAD_REQUEST");

  // the NPCs finish alone; the session ends and refuses input
  r = svc.handle("POST", "/api/v1/sessions/" + sid + "/advance", {{"ticks", 5000}});
  REQUIRE(r.status == 200);
  CHECK(r.body["status"] == "ended");
  check_envelope(svc.handle("POST", "/api/v1/sessions/" + sid + "/commands", {{"kind", "move"}, {"direction", "N"}}), 410, "SESSION_ENDED");
  auto log = svc.handle("GET", "/api/v1/sessions/" + sid + "/log").body["records"];
  REQUIRE_FALSE(log.empty());
  CHECK(log[0]["payload"]["mode"] == std::string(planner::to_string(planner::Mode::BL)));

  auto other = svc.handle("POST", "/api/v1/sessions", {{"vignette_id", vid}, {"mode", "cd"}}).body["session_id"].get<std::string>();
  CHECK(svc.handle("DELETE", "/api/v1/sessions/" + other).body["status"] == "closed");
  check_envelope(svc.handle("POST", "/api/v1/sessions/" + other + "/commands", {{"kind", "wait"}}), 410, "SESSION_ENDED");
  check_envelope(svc.handle("GET", "/api/v1/nothing"), 404, "NOT_FOUND");
}

TEST_CASE("live session over http with long-poll") {
  TempDir dir;
  api::Service svc(config_for(dir.path, 5), gateway_file("runtime_mock.json"));
  httplib::Server server;
  svc.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(10, 0);
  auto health = cli.Get("/api/v1/health");
  REQUIRE(health);
  CHECK(health->status == 200);

  auto bad = cli.Post("/api/v1/vignettes", "{oops", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  CHECK(Json::parse(bad->body)["code"] == "INVALID_JSON");

  auto imp = cli.Post("/api/v1/vignettes/import", Json{{"spec", encode_spec(fx::kelly_spec())}}.dump(), "application/json");
  REQUIRE(imp);
  REQUIRE(imp->status == 201);
  const std::string vid = Json::parse(imp->body)["id"];
  auto made = cli.Post("/api/v1/sessions", Json{{"vignette_id", vid}, {"mode", "cd"}}.dump(), "application/json");
  REQUIRE(made);
  REQUIRE(made->status == 201);
  const std::string sid = Json::parse(made->body)["session_id"];

  auto first = cli.Get("/api/v1/sessions/" + sid + "/state?since=0");
  REQUIRE(first);
  const Json s0 = Json::parse(first->body);
  const std::size_t next = s0["next"];
  CHECK(next > 0);

  const auto t0 = std::chrono::steady_clock::now();
  auto ack = cli.Post("/api/v1/sessions/" + sid + "/commands", Json{{"kind", "move"}, {"direction", "N"}}.dump(), "application/json");
  REQUIRE(ack);
  CHECK(ack->status == 202);
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(2));

  // waits for the next tick
  auto polled = cli.Get("/api/v1/sessions/" + sid + "/state?since=" + std::to_string(next) + "&wait_ms=2000");
  REQUIRE(polled);
  const Json s1 = Json::parse(polled->body);
  CHECK(s1["tick"].get<int>() > s0["tick"].get<int>());
  bool moved = false;
  for (int i = 0; i < 40 && !moved; ++i) {
    auto p = cli.Get("/api/v1/sessions/" + sid + "/log");
    const Json doc = Json::parse(p->body);
    for (const auto& rec : doc["records"]) moved = moved || rec["kind"] == "MOVE" || rec["kind"] == "BLOCKED";
    if (!moved) std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  CHECK(moved);

  auto del = cli.Delete("/api/v1/sessions/" + sid);
  REQUIRE(del);
  CHECK(del->status == 200);
  server.stop();
  listener.join();
}
