// HTTP + WebSocket service hosting any number of sessions.
#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "streamcheck/api_server.hpp"
#include "streamcheck/http_backends.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Serve the session API."};
  std::string host = "127.0.0.1", backends, log_dir, fixtures_dir = streamcheck::default_fixtures_dir();
  int port = 8080;
  app.add_option("--host", host);
  app.add_option("--port", port, "0 picks a free port");
  app.add_option("--backends", backends, "Default backend spec for sessions that name none");
  app.add_option("--log-dir", log_dir, "Directory for per-session JSONL logs");
  app.add_option("--fixtures-dir", fixtures_dir);
  CLI11_PARSE(app, argc, argv);

  sigset_t block;
  sigemptyset(&block);
  sigaddset(&block, SIGINT);
  sigaddset(&block, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &block, nullptr);
  try {
    streamcheck::SessionManager manager(
        [fixtures_dir](const std::string& spec) { return streamcheck::resolve_backends(spec, fixtures_dir); },
        backends, log_dir);
    streamcheck::ApiServer server(manager);
    const int bound = server.start(host, port);
    std::cout << "listening on http://" << host << ":" << bound << std::endl;
    int sig = 0;
    sigwait(&block, &sig);
    server.stop();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "streamcheck-server: " << e.what() << "\n";
    return 1;
  }
}
