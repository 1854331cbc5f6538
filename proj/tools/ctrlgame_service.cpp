// Serves the job API. Listen address comes from --listen or CTRLGAME_LISTEN.

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <iostream>

#include "ctrlgame/service.hpp"

namespace {
httplib::Server* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Control selection job service", "ctrlgame-service"};
  std::string listen = "127.0.0.1:8080";
  if (const char* env = std::getenv("CTRLGAME_LISTEN")) listen = env;
  std::string data_dir = "ctrlgame-data";
  std::string cors = "*";
  unsigned workers = 2;
  app.add_option("--listen", listen, "host:port to bind (env CTRLGAME_LISTEN)");
  app.add_option("--data-dir", data_dir, "Directory for stored specs and jobs");
  app.add_option("--workers", workers, "Concurrent jobs")->check(CLI::PositiveNumber);
  app.add_option("--cors-origin", cors, "Value for Access-Control-Allow-Origin");
  CLI11_PARSE(app, argc, argv);

  auto colon = listen.rfind(':');
  if (colon == std::string::npos) {
    std::cerr << "error: --listen expects host:port\n";
    return 2;
  }
  auto host = listen.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
    std::cerr << "error: bad port in '" << listen << "'\n";
    return 2;
  }

  ctrlgame::JobService service(data_dir, workers);
  httplib::Server server;
  ctrlgame::mount_routes(server, service, cors);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "listening on " << host << ":" << port << "\n";
  if (!server.listen(host, port)) {
    std::cerr << "error: cannot bind " << listen << "\n";
    return 1;
  }
  return 0;
}
