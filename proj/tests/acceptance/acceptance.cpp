// One line per acceptance criterion. Exit status is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <regex>

#include <boost/math/distributions/chi_squared.hpp>

#include "fixtures.hpp"
#include "vignette/codec.hpp"
#include "vignette/harness/harness.hpp"
#include "vignette/llm/mock.hpp"
#include "vignette/planner/planner.hpp"
#include "vignette/stats/stats.hpp"

using namespace vignette;
using Json = nlohmann::json;
using runtime::LogRecord;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
  std::vector<std::string> failures;

  void expect(bool cond, const std::string& what) {
    if (cond) return;
    ok = false;
    if (failures.size() < 8) failures.push_back(what);
  }
};

std::unique_ptr<llm::Gateway> gateway_from(const Json& script) {
  return std::make_unique<llm::Gateway>(std::make_shared<llm::ScriptedMock>(llm::MockScript::from_json(script)));
}

Json plan_latency(double ms) { return {{"defaults", {{"template_latency_ms", {{"PLAN_ACTIVITY", ms}, {"BL_ACTIVITY", ms / 2}}}}}}; }

Json kelly_script() { return Json::parse(fx::read_file(fx::source_dir() / "scenarios/kelly/runtime_mock.json")); }

std::size_t count_kind(const std::vector<LogRecord>& log, const std::string& kind) {
  return static_cast<std::size_t>(std::count_if(log.begin(), log.end(), [&](const LogRecord& r) { return r.kind == kind; }));
}

// Independent check of the bottleneck property, by record order:
// completions are 0..n-1 in order, each assigned character starts its authored part for event k
// after completion k-1 and before completion k, and nothing starts after the session ends.
std::vector<std::string> bottleneck_oracle(const std::vector<LogRecord>& log, const VignetteSpec& spec) {
  std::vector<std::string> bad;
  std::vector<std::size_t> done;
  std::size_t end = log.size();
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (log[i].kind == "EVENT_COMPLETE") {
      if (log[i].payload.value("key_event", -1) != static_cast<int>(done.size())) bad.push_back("completion out of order at seq " + std::to_string(i));
      done.push_back(i);
    }
    if (log[i].kind == "SESSION_END" && end == log.size()) end = i;
  }
  if (done.size() != spec.key_events.size()) bad.push_back("completed " + std::to_string(done.size()) + " of " + std::to_string(spec.key_events.size()));
  if (end == log.size()) bad.push_back("no SESSION_END");
  for (std::size_t k = 0; k < spec.key_events.size() && k < done.size(); ++k) {
    const std::size_t lo = k == 0 ? 0 : done[k - 1];
    for (const auto& a : spec.key_events[k].activities) {
      bool started = false;
      for (std::size_t i = 0; i < log.size(); ++i) {
        const auto& r = log[i];
        if (r.kind != "ACTIVITY_START" || r.actor != a.character_id || r.payload.value("key_event", -1) != static_cast<int>(k)) continue;
        if (i < lo || i > done[k]) bad.push_back(a.character_id + " authored part of event " + std::to_string(k) + " outside its window");
        started = true;
      }
      if (!started) bad.push_back(a.character_id + " never started its part of event " + std::to_string(k));
    }
  }
  for (std::size_t i = end; i < log.size(); ++i)
    if (log[i].kind == "ACTIVITY_START") bad.push_back("activity after the end at seq " + std::to_string(i));
  return bad;
}

Outcome bottleneck_safety() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  int runs = 0, divergent = 0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto spec = harness::generate_spec(1000 + s);
    auto gw = gateway_from(plan_latency(2000));
    for (std::uint64_t t = 0; t < 100; ++t) {
      const auto trace = harness::random_trace(spec, *gw, s * 10007 + t);
      const auto r = harness::run_trace(spec, trace, *gw);
      ++runs;
      const std::string id = "spec " + std::to_string(s) + " trace " + std::to_string(t);
      o.expect(r.ended, id + ": did not end");
      o.expect(r.problems.empty(), id + ": " + (r.problems.empty() ? "" : r.problems.front()));
      const auto bad = bottleneck_oracle(r.log, spec);
      o.expect(bad.empty(), id + ": " + (bad.empty() ? "" : bad.front()));
      for (const auto& rec : r.log)
        divergent += rec.kind == "ACTIVITY_START" && rec.actor != spec.player()->id && rec.payload.value("origin", "") != "authored";
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.expect(secs < 60.0, "took " + std::to_string(secs) + " s");
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d runs (5 specs x 100 traces), %d non-authored NPC activities checked, %.1f s", runs, divergent, secs);
  o.detail = buf;
  return o;
}

Outcome latency_hiding() {
  Outcome o;
  harness::RunOptions opt;
  const double d_ms = opt.config.activity_ticks * opt.config.ms_per_tick;
  std::size_t fast_fallbacks = 0, slow_fallbacks = 0, slow_runs = 0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto spec = harness::generate_spec(2000 + s);
    auto fast = gateway_from(plan_latency(0.5 * d_ms));
    auto slow = gateway_from(plan_latency(1.5 * d_ms));
    for (std::uint64_t t = 0; t < 10; ++t) {
      const auto trace = harness::random_trace(spec, *fast, s * 31 + t, opt);
      const auto a = harness::run_trace(spec, trace, *fast, opt);
      o.expect(a.ok(), "0.5D run not safe");
      fast_fallbacks += count_kind(a.log, "PLAN_FALLBACK");
      for (const auto& r : a.log) o.expect(r.payload.value("origin", "") != "fallback", "fallback activity at 0.5D");

      const auto b = harness::run_trace(spec, trace, *slow, opt);
      o.expect(b.ok(), "1.5D run not safe");
      ++slow_runs;
      for (std::size_t i = 0; i < b.log.size(); ++i) {
        if (b.log[i].kind != "PLAN_FALLBACK") continue;
        ++slow_fallbacks;
        o.expect(b.log[i].payload.value("reason", "") == "LATENCY_OVERRUN", "fallback without LATENCY_OVERRUN reason");
        o.expect(i + 1 < b.log.size() && b.log[i + 1].kind == "IDLE" && b.log[i + 1].actor == b.log[i].actor, "fallback not followed by IDLE");
      }
    }
  }
  o.expect(fast_fallbacks == 0, std::to_string(fast_fallbacks) + " fallbacks at 0.5D");
  o.expect(slow_fallbacks > 0, "no fallbacks at 1.5D");
  o.detail = "0.5D: " + std::to_string(fast_fallbacks) + " fallbacks in 50 runs; 1.5D: " + std::to_string(slow_fallbacks) +
             " logged LATENCY_OVERRUN fallbacks in " + std::to_string(slow_runs) + " runs";
  return o;
}

Outcome ablation_contracts() {
  Outcome o;
  auto spec = fx::kelly_spec();
  spec.find_character("jack")->personality = "supportive";
  planner::Storyline st;
  st.next_key_event = 1;
  st.past.push_back({{"kelly", "cooking dinner", "stove"}, planner::Origin::authored, 0});
  const std::map<planner::Mode, std::pair<bool, bool>> expect = {
      {planner::Mode::CD, {true, true}}, {planner::Mode::PO, {true, false}}, {planner::Mode::SO, {false, true}}};
  for (const auto& [mode, flags] : expect) {
    std::vector<llm::RenderedPrompt> seen;
    auto gw = gateway_from(kelly_script());
    gw->set_observer([&](const llm::RenderedPrompt& p) { seen.push_back(p); });
    planner::Planner pl(*gw, {mode, 3});
    pl.plan_pair(*spec.find_character("jack"), st, spec, 10, planner::idle_activity("jack"));
    const std::string name(planner::to_string(mode));
    o.expect(seen.size() == 1 && seen[0].template_id == llm::TemplateId::PLAN_ACTIVITY, name + ": expected one planning prompt");
    if (seen.empty()) continue;
    const std::string& u = seen[0].user;
    o.expect((u.find("## Persona") != std::string::npos) == flags.first, name + ": persona block");
    o.expect((u.find("supportive") != std::string::npos) == flags.first, name + ": persona content");
    o.expect((u.find("## Storyline") != std::string::npos) == flags.second, name + ": storyline block");
    o.expect((u.find("cooking dinner") != std::string::npos) == flags.second, name + ": storyline content");
  }

  // BL: 10 candidate objects, 1,000 draws
  VignetteSpec bl = fx::kelly_spec();
  std::vector<ObjectInstance> keep;
  for (const auto& obj : bl.environment.objects)
    if (obj.kind == ObjectKind::necessary_event) keep.push_back(obj);
  for (const auto& obj : bl.environment.objects)
    if (obj.kind != ObjectKind::necessary_event && keep.size() < 10) keep.push_back(obj);
  bl.environment.objects = keep;
  const auto objects = planner::Planner::candidates(bl.environment);
  o.expect(objects.size() == 10, "BL candidate set has " + std::to_string(objects.size()) + " objects");
  auto gw = gateway_from(Json::object());
  planner::Planner pl(*gw, {planner::Mode::BL, 99});
  std::map<std::string, int> counts;
  const int draws = 1000;
  for (int i = 0; i < draws; ++i) ++counts[pl.plan_pair(*bl.find_character("jack"), st, bl, i, planner::idle_activity("jack")).plan_B.object_id];
  const double expected = static_cast<double>(draws) / static_cast<double>(objects.size());
  double chi2 = 0;
  for (const auto* obj : objects) chi2 += (counts[obj->id] - expected) * (counts[obj->id] - expected) / expected;
  const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(static_cast<double>(objects.size() - 1)), chi2));
  o.expect(p > 0.01, "BL uniformity p = " + std::to_string(p));
  char buf[160];
  std::snprintf(buf, sizeof buf, "CD/PO/SO prompt blocks as required; BL chi-square %.2f on 9 df, p = %.3f over %d draws", chi2, p, draws);
  o.detail = buf;
  return o;
}

Outcome placement_suite() {
  Outcome o;
  const auto& assets = AssetCatalog::builtin().assets();
  env::ObjectResolver resolver;
  std::size_t placed = 0, unplaceable = 0, overlaps = 0, unreachable = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed + 7001);
    Environment base;
    base.layout_id = "rand";
    const int rooms = 1 + static_cast<int>(rng.uniform_index(3));
    const int rw = 3 + static_cast<int>(rng.uniform_index(6)), rh = 3 + static_cast<int>(rng.uniform_index(6));
    base.grid_width = rooms * (rw + 1) + 1;
    base.grid_height = rh + 2;
    for (int r = 0; r < rooms; ++r) {
      base.rooms.push_back({"r" + std::to_string(r), "room" + std::to_string(r), {1 + r * (rw + 1), 1, rw, rh}});
      if (r) base.doors.push_back({r * (rw + 1), 1 + static_cast<int>(rng.uniform_index(rh))});
    }
    refresh_walkable_mask(base);
    std::vector<env::RequiredObject> req;
    const int n = 1 + static_cast<int>(rng.uniform_index(8));
    for (int i = 0; i < n; ++i)
      req.push_back({assets[rng.uniform_index(assets.size())].display_name, "room" + std::to_string(rng.uniform_index(rooms)),
                     rng.uniform_index(2) ? ObjectKind::necessary_event : ObjectKind::necessary_room});
    const auto result = env::place_objects(base, req, resolver);
    const auto& e = result.environment;
    placed += e.objects.size();
    unplaceable += result.unplaceable.size();
    o.expect(e.objects.size() + result.unplaceable.size() == req.size(), "instance " + std::to_string(seed) + ": object neither placed nor reported");
    for (std::size_t i = 0; i < e.objects.size(); ++i)
      for (std::size_t j = i + 1; j < e.objects.size(); ++j) overlaps += e.objects[i].footprint_rect().overlaps(e.objects[j].footprint_rect());
    const auto spawn = spawn_tile(e);
    o.expect(spawn.has_value(), "instance " + std::to_string(seed) + ": no spawn");
    if (spawn)
      for (const auto& obj : e.objects) unreachable += !fx::oracle_zone_reachable(e, obj, *spawn);
  }
  o.expect(overlaps == 0, std::to_string(overlaps) + " overlaps");
  o.expect(unreachable == 0, std::to_string(unreachable) + " unreachable trigger zones");
  o.detail = "50 instances: " + std::to_string(placed) + " placed, " + std::to_string(unplaceable) + " reported UNPLACEABLE, " +
             std::to_string(overlaps) + " overlaps, " + std::to_string(unreachable) + " unreachable (brute-force oracle)";
  return o;
}

// chi-square survival in closed form for integer df
double chi2_sf(double x, int df) {
  if (df % 2 == 0) {
    double term = 1.0, sum = 1.0;
    for (int i = 1; i < df / 2; ++i) sum += (term *= (x / 2) / i);
    return std::exp(-x / 2) * sum;
  }
  double sum = 0.0, denom = 1.0;
  for (int i = 1; i <= (df - 1) / 2; ++i) sum += std::pow(x, i - 0.5) / (denom *= (2 * i - 1));
  return std::erfc(std::sqrt(x / 2)) + std::sqrt(2 / M_PI) * std::exp(-x / 2) * sum;
}

Outcome statistics() {
  Outcome o;
  int perfect = 0;
  for (int k = 3; k <= 6; ++k) {
    std::vector<int> row(k);
    std::iota(row.begin(), row.end(), 1);
    for (int n = 2; n <= 50; ++n) {
      stats::RankingDataset d;
      for (int j = 0; j < k; ++j) d.conditions.push_back("C" + std::to_string(j));
      d.ranks.assign(n, row);
      o.expect(stats::friedman_test(d).chi_square == static_cast<double>(n * (k - 1)), "perfect agreement k=" + std::to_string(k) + " N=" + std::to_string(n));
      ++perfect;
    }
  }

  std::mt19937_64 rng(777);
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    const int k = 3 + t % 4, n = 4 + static_cast<int>(rng() % 80);
    stats::RankingDataset d;
    for (int j = 0; j < k; ++j) d.conditions.push_back("C" + std::to_string(j));
    std::vector<int> row(k);
    std::iota(row.begin(), row.end(), 1);
    for (int i = 0; i < n; ++i) {
      auto r = row;
      if (i % 2) std::shuffle(r.begin(), r.end(), rng);
      else std::swap(r[rng() % (k - 1)], r[k - 1]);
      d.ranks.push_back(r);
    }
    // deviation form of the statistic
    std::vector<double> means(k, 0.0);
    for (const auto& r : d.ranks)
      for (int j = 0; j < k; ++j) means[j] += r[j];
    double dev = 0;
    for (auto& m : means) {
      m /= n;
      dev += (m - (k + 1) / 2.0) * (m - (k + 1) / 2.0);
    }
    const double chi = 12.0 * n / (k * (k + 1.0)) * dev;
    const auto res = stats::friedman_test(d);
    const auto got = stats::mean_rankings(d);
    worst = std::max({worst, std::abs(res.chi_square - chi), std::abs(res.p_value - chi2_sf(chi, k - 1))});
    for (int j = 0; j < k; ++j) worst = std::max(worst, std::abs(got[j] - means[j]));
  }
  o.expect(worst < 1e-9, "direct-formula oracle differs by " + std::to_string(worst));

  const double q05[] = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164};
  const double q10[] = {1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920};
  double qworst = 0;
  for (int k = 2; k <= 10; ++k) {
    qworst = std::max(qworst, std::abs(stats::studentized_range_quantile(0.05, k) / std::sqrt(2.0) - q05[k - 2]));
    qworst = std::max(qworst, std::abs(stats::studentized_range_quantile(0.10, k) / std::sqrt(2.0) - q10[k - 2]));
  }
  o.expect(qworst < 1e-3, "Nemenyi critical values differ from the table by " + std::to_string(qworst));

  const auto study = stats::load_rankings(fx::source_dir() / "scenarios/study/synthetic_rankings.csv");
  const std::string table = stats::format_pairwise_table(study, stats::nemenyi_posthoc(study), 0.01);
  std::vector<std::string> lines;
  std::stringstream ss(table);
  for (std::string l; std::getline(ss, l);) lines.push_back(l);
  o.expect(lines.size() == 2 + study.k(), "table has " + std::to_string(lines.size()) + " lines");
  const std::regex header(R"(\| \|( [A-Z]+ \(μ=\d\.\d\d\) \|){5})");
  o.expect(!lines.empty() && std::regex_match(lines[0], header), "header cells are not 'NAME (μ=x.xx)'");
  const std::regex cell(R"((-|\*\*< 0\.01\*\*|[01]\.\d\d))");
  for (std::size_t i = 2; i < lines.size(); ++i) {
    std::vector<std::string> cells;
    std::stringstream row(lines[i]);
    for (std::string c; std::getline(row, c, '|');) {
      c.erase(0, c.find_first_not_of(' '));
      c.erase(c.find_last_not_of(' ') + 1);
      cells.push_back(c);
    }
    // "", name, k cells
    o.expect(cells.size() == study.k() + 2, "row " + std::to_string(i) + " has the wrong number of cells");
    for (std::size_t j = 2; j < cells.size(); ++j) {
      const bool lower = j - 2 <= i - 2;
      o.expect(std::regex_match(cells[j], cell), "bad cell '" + cells[j] + "'");
      o.expect((cells[j] == "-") == lower, "row " + std::to_string(i) + " is not upper-triangular");
    }
  }
  char buf[220];
  std::snprintf(buf, sizeof buf, "%d perfect-agreement datasets exact; 20 random datasets within %.1e; q/sqrt2 table k=2..10 within %.1e; 5x5 table layout",
                perfect, worst, qworst);
  o.detail = buf;
  return o;
}

Outcome determinism() {
  Outcome o;
  int pairs = 0;
  {
    const auto spec = fx::kelly_spec();
    const auto trace = harness::load_trace(fx::source_dir() / "scenarios/kelly/trace.json");
    const auto a = runtime::to_ndjson(harness::run_trace(spec, trace, *gateway_from(kelly_script())).log);
    const auto b = runtime::to_ndjson(harness::run_trace(spec, trace, *gateway_from(kelly_script())).log);
    o.expect(a == b, "kelly logs differ between runs");
    o.expect(a == fx::read_file(fx::source_dir() / "scenarios/kelly/golden_log.ndjson"), "kelly log differs from the committed golden file");
    ++pairs;
  }
  for (std::uint64_t s = 1; s <= 3; ++s) {
    const auto spec = harness::generate_spec(3000 + s);
    for (auto mode : {planner::Mode::CD, planner::Mode::PO, planner::Mode::SO, planner::Mode::BL}) {
      harness::RunOptions opt;
      opt.config.mode = mode;
      opt.config.seed = s;
      auto g1 = gateway_from(plan_latency(3000));
      const auto trace = harness::random_trace(spec, *g1, s, opt);
      const auto a = runtime::to_ndjson(harness::run_trace(spec, trace, *g1, opt).log);
      const auto b = runtime::to_ndjson(harness::run_trace(spec, trace, *gateway_from(plan_latency(3000)), opt).log);
      o.expect(a == b, "spec " + std::to_string(s) + " mode " + std::string(planner::to_string(mode)) + " differs");
      ++pairs;
    }
  }
  o.detail = std::to_string(pairs) + " (spec, trace, mock) triples byte-identical across runs; kelly matches the committed log";
  return o;
}

Outcome spec_round_trip() {
  Outcome o;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto s = seed % 2 ? fx::random_valid_spec(seed) : harness::generate_spec(seed);
    try {
      const std::string a = encode_spec(s);
      const auto back = decode_spec(a);
      o.expect(back == s, "spec " + std::to_string(seed) + " changed in the round trip");
      o.expect(encode_spec(back) == a, "spec " + std::to_string(seed) + " re-encodes differently");
    } catch (const std::exception& e) {
      o.expect(false, "spec " + std::to_string(seed) + ": " + e.what());
    }
  }

  auto four = fx::kelly_spec();
  Character extra = four.characters[2];
  extra.id = "amy";
  extra.name = "Amy";
  four.characters.push_back(extra);
  bool rejected = false;
  try {
    decode_spec(canonical_dump(spec_to_json(four)));
  } catch (const InvalidSpecError& e) {
    rejected = e.report().has(ViolationCode::CHAR_CAP_EXCEEDED);
  }
  o.expect(rejected, "4-character document not rejected with CHAR_CAP_EXCEEDED");

  Json script = kelly_script();
  script["entries"].push_back({{"template", "CHAR_CHAT"}, {"when", {{"message", "Tell me a secret"}}}, {"response", {{"reply", "You are stupid."}}}});
  auto gw = gateway_from(script);
  runtime::Runtime rt(fx::kelly_spec(), *gw);
  rt.enqueue(runtime::ViewerCommand::chat(0, "julie", "Tell me a secret"));
  rt.enqueue(runtime::ViewerCommand::chat(0, "julie", "I will kill the plant"));
  for (int i = 0; i < 3; ++i) rt.step();
  int refusals = 0;
  for (const auto& r : rt.log())
    if (r.kind == "CHAT" || r.kind == "CHAT_WITHHELD") {
      o.expect(r.payload.dump().find("stupid") == std::string::npos, "denylisted reply reached the log");
      refusals += r.payload.value("text", "") == llm::kRefusalLine;
    }
  for (const auto& line : rt.world().chat_log) o.expect(line.text.find("stupid") == std::string::npos, "denylisted reply reached the viewer");
  o.expect(refusals >= 2, "expected the refusal line for both withheld messages, saw " + std::to_string(refusals));
  o.detail = "50 specs decode(encode(s)) == s and re-encode byte-identically; 4 characters -> CHAR_CAP_EXCEEDED; " + std::to_string(refusals) +
             " withheld chat lines replaced by the refusal line";
  return o;
}

Outcome scenario_replay() {
  Outcome o;
  const auto spec = fx::kelly_spec();
  auto gw = gateway_from(kelly_script());
  const auto trace = harness::load_trace(fx::source_dir() / "scenarios/kelly/trace.json");
  const auto r = harness::run_trace(spec, trace, *gw);
  o.expect(r.ok(), "kelly run not bottleneck-safe");
  const std::string golden = fx::read_file(fx::source_dir() / "scenarios/kelly/golden_log.ndjson");
  o.expect(runtime::to_ndjson(r.log) == golden, "log differs from golden_log.ndjson");
  o.expect(runtime::to_csv(r.table, spec) == fx::read_file(fx::source_dir() / "scenarios/kelly/golden_table.csv"), "table differs from golden_table.csv");

  auto find = [&](const std::string& actor, const std::string& kind, const std::string& key, const Json& v) {
    for (std::size_t i = 0; i < r.log.size(); ++i)
      if (r.log[i].actor == actor && r.log[i].kind == kind && r.log[i].payload.value(key, Json()) == v) return i;
    return r.log.size();
  };
  const std::size_t glow = find("system", "GLOW", "objects", Json({"stove"}));
  const std::size_t cook = find("kelly", "ACTIVITY_START", "action", "cooking dinner");
  const std::size_t shelf = find("kelly", "ACTIVITY_START", "action", "cleaning the bookshelf");
  const std::size_t guide = find("julie", "CHAT", "text", "Dinner is important. Let's have dinner together.");
  const std::size_t dinner = find("kelly", "ACTIVITY_START", "action", "having dinner");
  const std::size_t guitar = find("jack", "ACTIVITY_START", "action", "practicing guitar");
  const std::size_t sing = find("julie", "ACTIVITY_START", "action", "singing a song");
  const std::size_t end = find("system", "SESSION_END", "completed_events", 3);
  const std::vector<std::pair<const char*, std::size_t>> steps = {{"glow on the stove", glow},  {"cooking", cook},
                                                                   {"bookshelf divergence", shelf}, {"dinner guidance", guide},
                                                                   {"dinner", dinner},            {"guitar", guitar},
                                                                   {"end", end}};
  for (std::size_t i = 0; i < steps.size(); ++i) {
    o.expect(steps[i].second < r.log.size(), std::string("missing step: ") + steps[i].first);
    if (i) o.expect(steps[i - 1].second < steps[i].second, std::string(steps[i - 1].first) + " not before " + steps[i].first);
  }
  o.expect(sing < end && dinner < sing, "singing not between dinner and the end");
  o.detail = std::to_string(r.log.size()) + " records match golden_log.ndjson; glow, cook, divergence, guidance, dinner, guitar/singing, end in order";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Bottleneck safety", bottleneck_safety}, {"Latency hiding", latency_hiding},   {"Ablation contracts", ablation_contracts},
      {"Placement suite", placement_suite},     {"Statistics", statistics},           {"Determinism", determinism},
      {"Spec round-trip", spec_round_trip},     {"Scenario replay", scenario_replay}};
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.ok = false;
      o.failures.push_back(std::string("exception: ") + e.what());
    }
    std::printf("[%s] %s: %s\n", o.ok ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    for (const auto& f : o.failures) std::printf("       %s\n", f.c_str());
    std::fflush(stdout);
    failed += !o.ok;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
