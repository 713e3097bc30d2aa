#include "streamcheck/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "streamcheck/claims.hpp"
#include "streamcheck/config.hpp"
#include "streamcheck/error.hpp"
#include "streamcheck/http_backends.hpp"
#include "streamcheck/session.hpp"

namespace streamcheck {

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_interrupt(int) { g_interrupted = true; }

std::string pad(const std::string& s, std::size_t width, bool left = true) {
  if (s.size() >= width) return s;
  return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

std::string seconds(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << v;
  return os.str();
}

}  // namespace

std::string format_report_table(const StatsSnapshot& snapshot) {
  std::ostringstream os;
  const std::size_t w0 = 12;
  auto row = [&](const std::string& name, const std::string& talk, std::size_t total, std::size_t sup,
                 std::size_t dis, std::size_t unv) {
    os << pad(name, w0) << pad(talk, 10, false) << pad(std::to_string(total), 8, false)
       << pad(std::to_string(sup), 11, false) << pad(std::to_string(dis), 10, false)
       << pad(std::to_string(unv), 12, false) << "\n";
  };
  os << pad("speaker", w0) << pad("talk_s", 10, false) << pad("claims", 8, false) << pad("supported", 11, false)
     << pad("disputed", 10, false) << pad("unverified", 12, false) << "\n";
  SpeakerStats sum;
  for (const auto& s : snapshot.speakers) {
    row(s.speaker_id, seconds(s.talk_time_seconds), s.claims_total, s.supported, s.disputed, s.unverified);
    sum.talk_time_seconds += s.talk_time_seconds;
    sum.claims_total += s.claims_total;
    sum.supported += s.supported;
    sum.disputed += s.disputed;
    sum.unverified += s.unverified;
  }
  row("TOTAL", seconds(sum.talk_time_seconds), sum.claims_total, sum.supported, sum.disputed, sum.unverified);
  os << "\ntopics:";
  for (const auto& [letter, count] : snapshot.topics) os << " " << letter << "=" << count;
  os << "\nstream_time: " << seconds(snapshot.session_clock) << " s\n";
  return os.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Run a live or recorded audio source through the fact-checking engine."};
  std::string source, config_path, backends_spec, out_path, language, report = "table", fixtures_dir;
  std::vector<std::string> sets;
  bool canonical = false, realtime = false, quiet = false;
  app.add_option("--source", source, "Local audio file or HLS playlist URI")->required();
  app.add_option("--config", config_path, "Flat key=value engine configuration file");
  app.add_option("--backends", backends_spec, "Backend endpoint file, or mock:<fixture>[?opt=v&...]")->required();
  app.add_option("--out", out_path, "JSONL event log path ('-' for standard output)");
  app.add_option("--language", language, "Source language tag");
  app.add_option("--report", report, "Final report format")->check(CLI::IsMember({"json", "table", "none"}));
  app.add_option("--set", sets, "Config override key=value (repeatable)");
  app.add_option("--fixtures-dir", fixtures_dir, "Directory holding mock fixtures");
  app.add_flag("--canonical", canonical, "Write wall_time as 0 for reproducible logs");
  app.add_flag("--realtime", realtime, "Pace ingest against the wall clock");
  app.add_flag("--quiet", quiet, "Only log warnings and errors");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  // Logs share stderr with diagnostics; stdout carries only the report or JSONL.
  if (!spdlog::get("streamcheck")) spdlog::set_default_logger(spdlog::stderr_color_mt("streamcheck"));
  spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);
  if (fixtures_dir.empty()) fixtures_dir = default_fixtures_dir();

  std::shared_ptr<Session> session;
  try {
    EngineConfig config = config_path.empty() ? EngineConfig{} : load_config(config_path);
    std::map<std::string, std::string> overrides;
    for (const auto& kv : sets) {
      auto parsed = parse_key_values(kv, "--set");
      overrides.insert(parsed.begin(), parsed.end());
    }
    if (!language.empty()) overrides["language"] = language;
    if (realtime) overrides["realtime"] = "true";
    config = apply_overrides(std::move(config), overrides);
    BackendSet backends = resolve_backends(backends_spec, fixtures_dir);
    SessionOptions options;
    options.canonical = canonical;
    if (!out_path.empty() && out_path != "-") options.jsonl_path = out_path;
    session = std::make_shared<Session>("session-1", StreamSource::from_locator(source, config.language),
                                        config, std::move(backends), options);
  } catch (const InvalidConfig& e) {
    err << "invalid config: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const SchemaViolation& e) {
    err << "invalid fixture: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    session->start();
  } catch (const UnreachableSource& e) {
    err << "unreachable source: " << e.what() << "\n";
    return kExitUnreachableSource;
  } catch (const UnsupportedCodec& e) {
    err << "unsupported codec: " << e.what() << "\n";
    return kExitUnreachableSource;
  } catch (const InvalidConfig& e) {
    err << "invalid config: " << e.what() << "\n";
    return kExitInvalidConfig;
  }

  g_interrupted = false;
  auto previous = std::signal(SIGINT, on_interrupt);
  while (session->state() == SessionState::running) {
    if (g_interrupted.exchange(false)) {
      spdlog::info("interrupted; draining in-flight claims");
      try {
        session->stop();
      } catch (const IllegalTransition&) {
      }
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  const SessionState final_state = session->wait();
  std::signal(SIGINT, previous);

  std::ostream& report_out = out_path == "-" ? err : out;
  if (out_path == "-")
    for (const auto& e : session->log()->events()) out << e->line << "\n";

  const StatsSnapshot snapshot = session->stats();
  const PipelineMetrics metrics = session->metrics();
  if (report == "table") {
    report_out << format_report_table(snapshot);
  } else if (report == "json") {
    Json j{{"session", session->describe()},
           {"stats", snapshot.to_json()},
           {"metrics",
            {{"chunks", metrics.chunks},
             {"segments", metrics.segments},
             {"dropped_utterances", metrics.dropped_utterances},
             {"sentences", metrics.sentences},
             {"claims", metrics.claims},
             {"suppressed_duplicates", metrics.suppressed_duplicates},
             {"classifier_errors", metrics.classifier_errors},
             {"claims_all_backends_failed", metrics.claims_all_backends_failed},
             {"stream_duration", metrics.stream_duration}}}};
    report_out << j.dump(2) << "\n";
  }

  if (final_state == SessionState::failed) {
    err << "session failed: " << session->failure_reason() << "\n";
    return kExitUnreachableSource;
  }
  if (metrics.claims > 0 && metrics.claims_all_backends_failed == metrics.claims) {
    err << "every claim had all search backends fail\n";
    return kExitAllBackendsFailed;
  }
  return kExitOk;
}

}  // namespace streamcheck
