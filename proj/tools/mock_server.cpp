// Serves a fixture over the backend wire contracts and prints an endpoint
// file that points the engine at it.
#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "streamcheck/http_backends.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Serve mock backends over HTTP."};
  std::string fixture, host = "127.0.0.1", fixtures_dir = streamcheck::default_fixtures_dir(), endpoints_out;
  int port = 0;
  app.add_option("--fixture", fixture, "mock spec, e.g. debate_mini or debate_mini?latency_ms=200")->required();
  app.add_option("--host", host);
  app.add_option("--port", port, "0 picks a free port");
  app.add_option("--fixtures-dir", fixtures_dir);
  app.add_option("--endpoints-out", endpoints_out, "Also write the endpoint file here");
  CLI11_PARSE(app, argc, argv);
  // Block termination signals before any thread starts so sigwait sees them.
  sigset_t block;
  sigemptyset(&block);
  sigaddset(&block, SIGINT);
  sigaddset(&block, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &block, nullptr);
  try {
    const std::string spec = fixture.rfind("mock:", 0) == 0 ? fixture : "mock:" + fixture;
    streamcheck::BackendServer server(streamcheck::resolve_backends(spec, fixtures_dir));
    server.start(host, port);
    std::cout << server.endpoint_file() << std::flush;
    if (!endpoints_out.empty()) {
      std::ofstream f(endpoints_out);
      f << server.endpoint_file();
    }
    std::cerr << "serving on " << server.base_url() << "\n";
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "streamcheck-mock-server: " << e.what() << "\n";
    return 1;
  }
}
