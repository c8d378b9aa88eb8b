// HTTP front end for the authoring pipeline and live viewing sessions.
#include <csignal>
#include <iostream>

#include <CLI11.hpp>
#include <httplib.h>

#include "vignette/api/service.hpp"
#include "vignette/llm/http_provider.hpp"
#include "vignette/llm/mock.hpp"

using namespace vignette;

namespace {
httplib::Server* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vignette HTTP service (routes under /api/v1)"};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string mock;
  if (const char* p = std::getenv("VIGNETTE_PORT"); p && *p) port = std::atoi(p);
  if (const char* h = std::getenv("VIGNETTE_HOST"); h && *h) host = h;
  if (const char* m = std::getenv("VIGNETTE_MOCK"); m && *m) mock = m;
  api::ServiceConfig config;
  try {
    config = api::ServiceConfig::from_env();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::string store = config.store_dir.string();
  app.add_option("--host", host);
  app.add_option("--port", port)->check(CLI::Range(1, 65535));
  app.add_option("--store", store, "Directory for vignette documents and session logs");
  app.add_option("--mock", mock, "Scripted LLM mock instead of a live provider");
  app.add_option("--tick-ms", config.tick_ms, "Wall-clock milliseconds per session tick (0: advance on request)");
  CLI11_PARSE(app, argc, argv);
  config.store_dir = store;

  std::shared_ptr<llm::Provider> provider;
  try {
    if (!mock.empty()) {
      provider = llm::ScriptedMock::from_file(mock);
    } else if (auto http = llm::HttpProviderConfig::from_env()) {
      provider = std::make_shared<llm::OpenAiCompatibleProvider>(*http);
    } else {
      std::cerr << "warning: no VIGNETTE_LLM_URL and no --mock; answering every prompt with canned defaults\n";
      provider = std::make_shared<llm::ScriptedMock>(llm::MockScript{});
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    api::Service service(config, std::make_shared<llm::Gateway>(provider));
    httplib::Server server;
    service.mount(server);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "listening on http://" << host << ":" << port << "/api/v1 (store " << config.store_dir.string() << ", provider "
              << provider->id() << ")\n";
    if (!server.listen(host, port)) {
      std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
