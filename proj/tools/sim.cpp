// Headless driver: replays viewer traces, records new ones, and runs the ranking statistics.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "vignette/codec.hpp"
#include "vignette/env/placement.hpp"
#include "vignette/harness/harness.hpp"
#include "vignette/llm/mock.hpp"
#include "vignette/stats/stats.hpp"

namespace fs = std::filesystem;
using namespace vignette;
using Json = nlohmann::json;

namespace {

constexpr int kExitUnsafe = 1;
constexpr int kExitInput = 2;

// Input problems: exit code 2 with the offending path in the message.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw std::runtime_error("cannot write " + p.string());
}

VignetteSpec load_spec(const fs::path& p) {
  const std::string bytes = read_file(p);
  try {
    return decode_spec(bytes);
  } catch (const SpecError& e) {
    throw InputError(p.string() + ": " + e.what());
  }
}

std::unique_ptr<llm::Gateway> load_gateway(const fs::path& mock) {
  try {
    return std::make_unique<llm::Gateway>(llm::ScriptedMock::from_file(mock));
  } catch (const std::exception& e) {
    throw InputError(mock.string() + ": " + e.what());
  }
}

harness::ViewerTrace load_trace(const fs::path& p) {
  try {
    return harness::load_trace(p);
  } catch (const std::exception& e) {
    throw InputError(p.string() + ": " + e.what());
  }
}

struct Common {
  std::string mode = "cd";
  std::uint64_t seed = 1;
  int activity_ticks = 80;
  double ms_per_tick = 100.0;
  int max_ticks = 20000;

  harness::RunOptions options() const {
    harness::RunOptions o;
    auto m = planner::parse_mode(mode);
    if (!m) throw InputError("unknown mode '" + mode + "'");
    o.config.mode = *m;
    o.config.seed = seed;
    o.config.activity_ticks = activity_ticks;
    o.config.ms_per_tick = ms_per_tick;
    o.max_ticks = max_ticks;
    return o;
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--mode", c.mode, "Planner mode")->check(CLI::IsMember({"cd", "po", "so", "bl", "CD", "PO", "SO", "BL"}));
  cmd->add_option("--seed", c.seed, "Planner seed");
  cmd->add_option("--activity-ticks", c.activity_ticks, "Dwell ticks per activity")->check(CLI::PositiveNumber);
  cmd->add_option("--ms-per-tick", c.ms_per_tick, "Milliseconds of provider latency per tick")->check(CLI::PositiveNumber);
  cmd->add_option("--max-ticks", c.max_ticks, "Give up after this many ticks")->check(CLI::PositiveNumber);
}

int cmd_run(const fs::path& spec_file, const fs::path& trace_file, const fs::path& mock, const fs::path& out, const Common& c) {
  const auto spec = load_spec(spec_file);
  const auto trace = load_trace(trace_file);
  auto gw = load_gateway(mock);
  const auto result = harness::run_trace(spec, trace, *gw, c.options());
  int fallbacks = 0;
  for (const auto& r : result.log) fallbacks += r.kind == "PLAN_FALLBACK";
  write_file(out / "log.ndjson", runtime::to_ndjson(result.log));
  write_file(out / "table.csv", runtime::to_csv(result.table, spec));
  write_file(out / "table.json", runtime::to_json(result.table).dump(2) + "\n");
  Json summary = {{"ended", result.ended},
                  {"final_tick", result.final_tick},
                  {"records", result.log.size()},
                  {"fallbacks", fallbacks},
                  {"bottleneck_safe", result.ok()},
                  {"problems", result.problems}};
  write_file(out / "summary.json", summary.dump(2) + "\n");
  if (!result.ok()) {
    std::cerr << "run is not bottleneck-safe:\n";
    if (!result.ended) std::cerr << "  session did not end\n";
    for (const auto& p : result.problems) std::cerr << "  " << p << "\n";
    return kExitUnsafe;
  }
  std::cout << "ended at tick " << result.final_tick << ", " << result.log.size() << " records, " << fallbacks << " fallbacks\n";
  return 0;
}

int cmd_stats(const fs::path& rankings, const std::string& test, double alpha) {
  stats::RankingDataset d;
  try {
    d = stats::load_rankings(rankings);
  } catch (const stats::DatasetError& e) {
    throw InputError(e.what());
  }
  if (test == "means") {
    std::cout << "N=" << d.n() << " k=" << d.k() << "\n" << stats::format_means(d) << "\n";
  } else if (test == "friedman") {
    const auto r = stats::friedman_test(d);
    std::printf("Friedman chi-square = %.4f, df = %.0f, p = %.3g (N=%zu, k=%zu)\n", r.chi_square, r.df, r.p_value, r.n, r.k);
  } else {
    const auto p = stats::nemenyi_posthoc(d);
    std::printf("Nemenyi critical difference (alpha=%.2f): %.4f\n", alpha, stats::nemenyi_critical_difference(static_cast<int>(d.k()), d.n(), alpha));
    std::cout << stats::format_pairwise_table(d, p, alpha);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Replay viewer traces against vignette specs and analyse ranking studies"};
  app.require_subcommand(1);
  Common common;

  fs::path spec_file, trace_file, mock, out, script, rankings;
  auto* run = app.add_subcommand("run", "Replay a trace and write log.ndjson, table.csv, table.json, summary.json");
  run->add_option("--spec", spec_file, "Vignette spec document")->required();
  run->add_option("--trace", trace_file, "Viewer trace (JSON)")->required();
  run->add_option("--mock", mock, "Scripted LLM mock")->required();
  run->add_option("--out", out, "Output directory")->required();
  add_common(run, common);

  auto* record = app.add_subcommand("record", "Play a high-level viewer script and save the low-level trace");
  record->add_option("--spec", spec_file)->required();
  record->add_option("--script", script, "Viewer script (JSON list of steps)")->required();
  record->add_option("--mock", mock)->required();
  record->add_option("--out", out, "Trace file to write")->required();
  add_common(record, common);

  std::uint64_t trace_seed = 1;
  int max_commands = 400;
  auto* random = app.add_subcommand("random", "Record a randomized viewer trace");
  random->add_option("--spec", spec_file)->required();
  random->add_option("--mock", mock)->required();
  random->add_option("--trace-seed", trace_seed, "Seed of the random viewer");
  random->add_option("--max-commands", max_commands)->check(CLI::PositiveNumber);
  random->add_option("--out", out)->required();
  add_common(random, common);

  std::uint64_t spec_seed = 1;
  auto* generate = app.add_subcommand("generate", "Write a random runnable spec");
  generate->add_option("--seed", spec_seed);
  generate->add_option("--out", out)->required();

  auto* validate = app.add_subcommand("validate", "Check a spec document");
  validate->add_option("--spec", spec_file)->required();

  std::string test = "friedman";
  double alpha = 0.05;
  auto* st = app.add_subcommand("stats", "Friedman test, Nemenyi post-hoc table or mean ranks");
  st->add_option("--rankings", rankings, "CSV: header evaluator,<conditions...>; one permutation of 1..k per row")->required();
  st->add_option("--test", test)->check(CLI::IsMember({"friedman", "nemenyi", "means"}));
  st->add_option("--alpha", alpha, "Significance level for the critical difference and bold cells")->check(CLI::Range(0.0001, 0.5));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(spec_file, trace_file, mock, out, common);
    if (*record) {
      const auto spec = load_spec(spec_file);
      auto gw = load_gateway(mock);
      std::vector<harness::ScriptStep> steps;
      try {
        steps = harness::script_from_json(Json::parse(read_file(script)));
      } catch (const std::exception& e) {
        throw InputError(script.string() + ": " + e.what());
      }
      const auto trace = harness::record_script(spec, *gw, steps, common.options());
      write_file(out, harness::to_json(trace).dump(2) + "\n");
      std::cout << "recorded " << trace.commands.size() << " commands\n";
      return 0;
    }
    if (*random) {
      const auto spec = load_spec(spec_file);
      auto gw = load_gateway(mock);
      const auto trace = harness::random_trace(spec, *gw, trace_seed, common.options(), max_commands);
      write_file(out, harness::to_json(trace).dump(2) + "\n");
      std::cout << "recorded " << trace.commands.size() << " commands\n";
      return 0;
    }
    if (*generate) {
      write_file(out, encode_spec(harness::generate_spec(spec_seed)));
      return 0;
    }
    if (*validate) {
      const auto spec = load_spec(spec_file);
      const auto report = env::validate_environment(spec);
      if (!report.ok()) {
        std::cerr << spec_file.string() << ": " << report.summary() << "\n";
        return kExitInput;
      }
      std::cout << spec_file.string() << ": ok\n";
      return 0;
    }
    if (*st) return cmd_stats(rankings, test, alpha);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUnsafe;
  }
  return 0;
}
