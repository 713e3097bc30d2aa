#include "streamcheck/pipeline.hpp"

#include <cstdio>
#include <variant>

#include <spdlog/spdlog.h>

#include "streamcheck/alignment.hpp"
#include "streamcheck/claims.hpp"
#include "streamcheck/diarization.hpp"
#include "streamcheck/error.hpp"
#include "streamcheck/evidence.hpp"
#include "streamcheck/transcribe.hpp"
#include "streamcheck/util/async_call.hpp"
#include "streamcheck/util/bounded_queue.hpp"
#include "streamcheck/util/ordered_pool.hpp"
#include "streamcheck/verdict.hpp"

namespace streamcheck {

namespace {

struct SegmentMsg {
  TranscriptSegment segment;
  Clock::time_point finalized;
};
struct AttributedMsg {
  AttributedSegment segment;
  Clock::time_point finalized;
};
struct Watermark {
  double t;
};
using AlignMsg = std::variant<SegmentMsg, Watermark>;
using ClaimMsg = std::variant<AttributedMsg, Watermark>;

struct Phase1Out {
  std::optional<double> watermark;  // set for ordering markers
  std::optional<Claim> claim;
  Clock::time_point finalized;
  bool classifier_error = false;
};

struct ClaimResult {
  Claim claim;
  GatherResult gathered;
  FilteredEvidence filtered;
  std::size_t after_dedupe = 0;
  std::vector<RankedEvidence> ranked;
  ClaimVerdict verdict;
};

struct Phase2Out {
  std::optional<double> watermark;
  std::optional<ClaimResult> result;
};

std::string format_id(const char* prefix, int width, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%0*zu", prefix, width, n);
  return buf;
}

Json doc_json(const EvidenceDoc& d, bool canonical) {
  return {{"url", d.url},
          {"canonical_url", d.canonical_url},
          {"title", d.title},
          {"snippet", d.snippet},
          {"source_backend", d.source_backend},
          {"retrieved_at", canonical ? 0.0 : d.retrieved_at}};
}

}  // namespace

struct Pipeline::Impl {
  Impl(EngineConfig c, BackendSet b, std::shared_ptr<EventLog> l, bool canon)
      : config(std::move(c)),
        backends(std::move(b)),
        log(std::move(l)),
        canonical(canon),
        prompts(config.prompts_dir.empty() ? PromptStore::defaults() : PromptStore::load_dir(config.prompts_dir)),
        blocklist(config.blocklist()),
        stats(config.diarization.merge_gap),
        sequencer(kLaneCount, [this](PendingEvent&& ev) { publish(std::move(ev)); }),
        transcribe_q(config.queue_capacity),
        diarize_q(config.queue_capacity),
        align_q(1024),
        claim_q(1024),
        dedup(config.claims.dedup_threshold, config.claims.dedup_window) {
    backends.validate();
  }

  // --- configuration and shared state ---
  EngineConfig config;
  BackendSet backends;
  std::shared_ptr<EventLog> log;
  bool canonical;
  PromptStore prompts;
  std::set<std::string> blocklist;

  mutable std::mutex stats_mutex;
  SessionStats stats;
  mutable std::mutex metrics_mutex;
  PipelineMetrics metrics;
  std::map<std::string, Clock::time_point> claim_finalized;

  Sequencer sequencer;
  std::unique_ptr<ChunkProducer> producer;

  BoundedQueue<AudioChunk> transcribe_q;
  BoundedQueue<AudioChunk> diarize_q;
  BoundedQueue<AlignMsg> align_q;
  BoundedQueue<ClaimMsg> claim_q;

  // Diarization progress seen by the aligner.
  std::mutex diar_mutex;
  std::condition_variable diar_cv;
  SpeakerTimeline shared_timeline{config.diarization.merge_gap};
  double covered = 0.0;
  bool diar_done = false;

  std::atomic<bool> aborting{false};
  std::atomic<bool> stop_requested{false};
  mutable std::mutex state_mutex;
  std::condition_variable done_cv;
  int running_stages = 0;
  PipelineOutcome result = PipelineOutcome::running;
  std::string failure;
  EndReason end = EndReason::none;

  ClaimDeduplicator dedup;
  std::size_t next_claim = 1;
  std::unique_ptr<OrderedPool<Phase2Out>> phase2;

  std::vector<std::thread> threads;

  // --- publishing (runs under the sequencer lock) ---
  void publish(PendingEvent&& ev) {
    const bool is_verdict = ev.kind == EventKind::verdict;
    const std::string claim_id = is_verdict ? ev.payload.value("claim_id", std::string()) : std::string();
    auto published = log->append(ev.kind, ev.stream_time, std::move(ev.payload));
    Json snapshot;
    {
      std::lock_guard lock(stats_mutex);
      stats.apply(published->event);
      if (is_verdict) snapshot = stats.snapshot().to_json();
    }
    if (!is_verdict) return;
    {
      std::lock_guard lock(metrics_mutex);
      auto it = claim_finalized.find(claim_id);
      if (it != claim_finalized.end()) {
        metrics.claim_latencies.push_back(std::chrono::duration<double>(Clock::now() - it->second).count());
        claim_finalized.erase(it);
      }
    }
    auto snap = log->append(EventKind::stats_snapshot, published->event.stream_time, std::move(snapshot));
    std::lock_guard lock(stats_mutex);
    stats.apply(snap->event);
  }

  void fail(const std::string& why) {
    {
      std::lock_guard lock(state_mutex);
      if (result != PipelineOutcome::failed) failure = why;
      result = PipelineOutcome::failed;
    }
    spdlog::error("pipeline failure: {}", why);
    aborting = true;
    if (producer) producer->cancel();
  }

  template <typename F>
  void launch(F body) {
    {
      std::lock_guard lock(state_mutex);
      ++running_stages;
    }
    threads.emplace_back([this, body = std::move(body)]() mutable {
      try {
        body();
      } catch (const std::exception& e) {
        fail(e.what());
      }
      std::lock_guard lock(state_mutex);
      --running_stages;
      done_cv.notify_all();
    });
  }

  // --- stages ---
  void ingest_stage() {
    const auto wall_start = Clock::now();
    double end_time = 0.0;
    try {
      while (auto chunk = producer->next()) {
        if (config.realtime) {
          const auto due = wall_start + std::chrono::duration_cast<Clock::duration>(
                                            std::chrono::duration<double>(chunk->end_time() / config.realtime_speed));
          std::this_thread::sleep_until(due);
        }
        end_time = chunk->end_time();
        {
          std::lock_guard lock(metrics_mutex);
          ++metrics.chunks;
          metrics.stream_duration = end_time;
        }
        diarize_q.push(*chunk);
        transcribe_q.push(std::move(*chunk));
        if (stop_requested) break;
      }
    } catch (...) {
      diarize_q.close();
      transcribe_q.close();
      throw;
    }
    {
      std::lock_guard lock(state_mutex);
      end = stop_requested ? EndReason::cancelled : producer->end_reason();
    }
    diarize_q.close();
    transcribe_q.close();
  }

  void transcribe_stage() {
    UtteranceGate gate_fsm(config.hangover_silence, config.max_utterance);
    TranscribeOptions topts = config.transcribe;
    topts.language = config.language;
    std::size_t next_segment = 1;
    auto handle = [&](const Utterance& utt) {
      if (aborting) {
        sequencer.push(kDroppedLane, {EventKind::dropped_audio, utt.end_time(),
                                      {{"t_start", utt.start_time}, {"t_end", utt.end_time()}, {"reason", "aborted"}}});
        return;
      }
      UtteranceTranscript tr = transcribe_utterance(utt, backends.asr, topts);
      if (tr.dropped) {
        {
          std::lock_guard lock(metrics_mutex);
          ++metrics.dropped_utterances;
        }
        sequencer.push(kDroppedLane, {EventKind::dropped_audio, tr.end_time,
                                      {{"t_start", tr.start_time},
                                       {"t_end", tr.end_time},
                                       {"reason", tr.drop_reason},
                                       {"first_sequence_no", utt.first_sequence_no},
                                       {"last_sequence_no", utt.last_sequence_no}}});
        return;
      }
      const auto finalized = Clock::now();
      for (auto& seg : tr.segments) {
        seg.segment_id = format_id("seg", 6, next_segment++);
        {
          std::lock_guard lock(metrics_mutex);
          ++metrics.segments;
        }
        align_q.push(SegmentMsg{std::move(seg), finalized});
      }
    };
    auto watermark = [&](double t) {
      sequencer.advance(kDroppedLane, t);
      align_q.try_push(Watermark{t});
    };
    try {
      while (auto chunk = transcribe_q.pop()) {
        const Gate g = gate(*chunk, *backends.vad);
        if (auto utt = gate_fsm.feed(*chunk, g)) handle(*utt);
        watermark(gate_fsm.open_start().value_or(chunk->end_time()));
      }
      if (auto utt = gate_fsm.flush()) handle(*utt);
    } catch (...) {
      align_q.close();
      sequencer.close(kDroppedLane);
      throw;
    }
    align_q.close();
    sequencer.close(kDroppedLane);
  }

  void diarize_stage() {
    OnlineDiarizer diarizer(backends.segmentation, backends.embedding, config.diarization);
    double session_end = 0.0;
    auto publish_hops = [&](const std::vector<HopResult>& hops) {
      for (const auto& hop : hops) {
        {
          std::lock_guard lock(diar_mutex);
          for (const auto& iv : hop.intervals) shared_timeline.add(iv);
          covered = std::max(covered, hop.hop_end);
        }
        diar_cv.notify_all();
        if (!hop.intervals.empty() || !hop.new_speakers.empty() || hop.skipped) {
          Json intervals = Json::array();
          for (const auto& iv : hop.intervals)
            intervals.push_back({{"speaker_id", iv.speaker_id}, {"t_start", iv.t_start}, {"t_end", iv.t_end}});
          Json payload{{"hop_start", hop.hop_start},
                       {"hop_end", hop.hop_end},
                       {"intervals", intervals},
                       {"new_speakers", hop.new_speakers}};
          if (hop.skipped) {
            payload["skipped"] = true;
            payload["reason"] = hop.skip_reason;
          }
          sequencer.push(kTimelineLane, {EventKind::timeline, hop.hop_end, std::move(payload)});
        }
        sequencer.advance(kTimelineLane, hop.hop_end);
      }
    };
    try {
      while (auto chunk = diarize_q.pop()) {
        session_end = chunk->end_time();
        if (aborting) continue;
        publish_hops(diarizer.push(*chunk));
      }
      if (!aborting) publish_hops(diarizer.finish(session_end));
    } catch (...) {
      finish_diarization();
      throw;
    }
    finish_diarization();
  }

  void finish_diarization() {
    {
      std::lock_guard lock(diar_mutex);
      diar_done = true;
    }
    diar_cv.notify_all();
    sequencer.close(kTimelineLane);
  }

  void align_stage() {
    try {
      while (auto msg = align_q.pop()) {
        if (auto* w = std::get_if<Watermark>(&*msg)) {
          sequencer.advance(kTranscriptLane, w->t);
          claim_q.try_push(*w);
          continue;
        }
        auto& sm = std::get<SegmentMsg>(*msg);
        const double need = sm.segment.t_end + config.alignment.grace_stream;
        const auto wall_limit = sm.finalized + std::chrono::duration_cast<Clock::duration>(
                                                   std::chrono::duration<double>(config.alignment.grace_wall));
        AttributedSegment attributed;
        {
          std::unique_lock lock(diar_mutex);
          auto ready = [&] { return diar_done || covered >= need || aborting; };
          if (config.realtime) {
            diar_cv.wait_until(lock, wall_limit, ready);
          } else {
            while (!ready()) diar_cv.wait_for(lock, std::chrono::milliseconds(50));
          }
          attributed = attribute(sm.segment, shared_timeline, config.alignment.min_overlap);
        }
        const auto& s = attributed.segment;
        sequencer.push(kTranscriptLane, {EventKind::transcript, s.t_end,
                                         {{"segment_id", s.segment_id},
                                          {"text", s.text},
                                          {"t_start", s.t_start},
                                          {"t_end", s.t_end},
                                          {"language", s.language},
                                          {"speaker_id", attributed.speaker_id},
                                          {"overlap_fraction", attributed.overlap_fraction}}});
        sequencer.advance(kTranscriptLane, s.t_end);
        claim_q.push(AttributedMsg{std::move(attributed), sm.finalized});
      }
    } catch (...) {
      claim_q.close();
      sequencer.close(kTranscriptLane);
      throw;
    }
    claim_q.close();
    sequencer.close(kTranscriptLane);
  }

  Phase1Out analyze_sentence(const Sentence& s, const std::vector<std::string>& context, Clock::time_point finalized) {
    Phase1Out out;
    out.finalized = finalized;
    if (aborting) return out;
    const auto& co = config.claims;
    const std::string normalized =
        normalize(s.text, context, backends.textgen, prompts, config.language, co.backend_deadline);
    Checkworthiness cw;
    try {
      cw = detect_checkworthy(normalized, backends.classifier, co.checkworthy_threshold, co.backend_deadline);
    } catch (const std::exception& e) {
      spdlog::warn("check-worthiness failed, sentence skipped: {}", e.what());
      out.classifier_error = true;
      return out;
    }
    if (!cw.checkworthy) return out;

    auto gen = backends.textgen;
    auto topic_call = AsyncCall<char>::start([gen, prompts = prompts, normalized, deadline = co.backend_deadline] {
      return assign_topic(normalized, gen, prompts, deadline);
    });
    std::vector<std::string> questions =
        decompose(normalized, gen, prompts, co.num_questions, config.language, co.backend_deadline);
    Claim c;
    c.raw_text = s.text;
    c.normalized_text = normalized;
    c.speaker_id = s.speaker_id;
    c.segment_id = s.segment_id;
    c.t_start = s.t_start;
    c.t_end = s.t_end;
    c.checkworthy_score = cw.score;
    c.questions = std::move(questions);
    c.language = config.language;
    try {
      c.topic = topic_call.get_until(Clock::now() + std::chrono::hours(1));
    } catch (const std::exception&) {
      c.topic = 'H';
    }
    out.claim = std::move(c);
    return out;
  }

  ClaimResult verify_claim(Claim claim) {
    ClaimResult r;
    r.claim = std::move(claim);
    const Claim& c = r.claim;
    r.verdict.claim_id = c.claim_id;
    if (aborting) return r;
    r.gathered = gather(c.questions, c.claim_id, c.language, backends.search, config.gather);
    r.filtered = filter_factcheck_sites(r.gathered.docs, blocklist, backends.internal_index);
    auto unique = dedupe(r.filtered.evidence, config.evidence_jaccard);
    r.after_dedupe = unique.size();
    r.ranked = rank(c.normalized_text, unique, backends.ranker, config.rank);
    auto votes = classify_all(c.normalized_text, r.ranked, backends.nli, config.nli_deadline);
    r.verdict = aggregate(votes);
    r.verdict.claim_id = c.claim_id;
    r.verdict.justification = summarize_justification(c.normalized_text, r.verdict, r.ranked, backends.textgen,
                                                      prompts, c.language, config.justification_deadline);
    return r;
  }

  void emit_claim(const ClaimResult& r) {
    const Claim& c = r.claim;
    const double t = c.t_end;
    Json questions = c.questions;
    sequencer.push(kClaimLane, {EventKind::claim_detected, t,
                                {{"claim_id", c.claim_id},
                                 {"raw_text", c.raw_text},
                                 {"normalized_text", c.normalized_text},
                                 {"speaker_id", c.speaker_id},
                                 {"segment_id", c.segment_id},
                                 {"t_start", c.t_start},
                                 {"t_end", c.t_end},
                                 {"checkworthy_score", c.checkworthy_score},
                                 {"topic", std::string(1, c.topic)},
                                 {"topic_name", topic_name(c.topic)},
                                 {"questions", questions},
                                 {"language", c.language}}});
    Json evidence = Json::array();
    for (const auto& e : r.ranked) {
      Json d = doc_json(e.doc, canonical);
      d["rank"] = e.rank;
      d["relevance"] = e.relevance;
      evidence.push_back(std::move(d));
    }
    Json previous = Json::array();
    // One fact-check article typically answers several questions; list it once.
    for (const auto& d : dedupe(r.filtered.previous_fact_checks, config.evidence_jaccard))
      previous.push_back(doc_json(d, canonical));
    sequencer.push(kClaimLane, {EventKind::evidence_ready, t,
                                {{"claim_id", c.claim_id},
                                 {"evidence", evidence},
                                 {"previous_fact_checks", previous},
                                 {"counts",
                                  {{"gathered", r.gathered.docs.size()},
                                   {"after_filter", r.filtered.evidence.size()},
                                   {"after_dedupe", r.after_dedupe},
                                   {"ranked", r.ranked.size()}}},
                                 {"search_calls", r.gathered.calls},
                                 {"search_failures", r.gathered.failures},
                                 {"all_backends_failed", r.gathered.all_failed()}}});
    Json votes = Json::array();
    for (const auto& v : r.verdict.votes)
      votes.push_back({{"rank", v.rank}, {"label", to_string(v.label)}, {"confidence", v.confidence}});
    sequencer.push(kClaimLane, {EventKind::verdict, t,
                                {{"claim_id", c.claim_id},
                                 {"speaker_id", c.speaker_id},
                                 {"topic", std::string(1, c.topic)},
                                 {"label", to_string(r.verdict.label)},
                                 {"support_count", r.verdict.support_count},
                                 {"refute_count", r.verdict.refute_count},
                                 {"votes", votes},
                                 {"justification", r.verdict.justification}}});
  }

  void claim_stage() {
    phase2 = std::make_unique<OrderedPool<Phase2Out>>(config.claims.max_in_flight, [this](Phase2Out out) {
      if (out.watermark) {
        sequencer.advance(kClaimLane, *out.watermark);
        return;
      }
      if (!out.result) return;
      {
        std::lock_guard lock(metrics_mutex);
        ++metrics.claims;
        if (out.result->gathered.all_failed()) ++metrics.claims_all_backends_failed;
      }
      emit_claim(*out.result);
    });
    OrderedPool<Phase1Out> phase1(config.claims.max_in_flight, [this](Phase1Out out) {
      if (out.watermark) {
        const double w = *out.watermark;
        phase2->submit([w] { return Phase2Out{w, std::nullopt}; });
        return;
      }
      if (out.classifier_error) {
        std::lock_guard lock(metrics_mutex);
        ++metrics.classifier_errors;
      }
      if (!out.claim) return;
      Claim c = std::move(*out.claim);
      if (!dedup.admit(c.normalized_text, c.t_start)) {
        std::lock_guard lock(metrics_mutex);
        ++metrics.suppressed_duplicates;
        return;
      }
      c.claim_id = format_id("claim", 4, next_claim++);
      {
        std::lock_guard lock(metrics_mutex);
        claim_finalized[c.claim_id] = out.finalized;
      }
      phase2->submit([this, c = std::move(c)]() mutable {
        return Phase2Out{std::nullopt, verify_claim(std::move(c))};
      });
    });

    std::map<std::string, std::deque<std::string>> history;
    auto marker = [&](double w) { phase1.submit([w] { return Phase1Out{w, std::nullopt, {}, false}; }); };
    try {
      while (auto msg = claim_q.pop()) {
        if (auto* w = std::get_if<Watermark>(&*msg)) {
          marker(w->t);
          continue;
        }
        auto& am = std::get<AttributedMsg>(*msg);
        const auto& seg = am.segment.segment;
        for (auto& s : split_sentences(seg.text)) {
          s.segment_id = seg.segment_id;
          s.speaker_id = am.segment.speaker_id;
          s.t_start = seg.t_start;
          s.t_end = seg.t_end;
          auto& hist = history[s.speaker_id];
          std::vector<std::string> context(hist.begin(), hist.end());
          hist.push_back(s.text);
          while (hist.size() > config.claims.context_sentences) hist.pop_front();
          {
            std::lock_guard lock(metrics_mutex);
            ++metrics.sentences;
          }
          const auto finalized = am.finalized;
          phase1.submit([this, s, context = std::move(context), finalized] {
            return analyze_sentence(s, context, finalized);
          });
        }
        marker(seg.t_end);
      }
    } catch (...) {
      phase1.wait_idle();
      phase2->wait_idle();
      sequencer.close(kClaimLane);
      throw;
    }
    phase1.wait_idle();
    phase2->wait_idle();
    sequencer.close(kClaimLane);
  }
};

Pipeline::Pipeline(EngineConfig config, BackendSet backends, std::shared_ptr<EventLog> log, bool canonical) {
  config.validate();
  impl_ = std::make_unique<Impl>(std::move(config), std::move(backends), std::move(log), canonical);
}

Pipeline::~Pipeline() {
  if (!impl_) return;
  if (!impl_->threads.empty()) {
    abort();
    join();
  }
}

void Pipeline::start(std::unique_ptr<ChunkProducer> producer) {
  auto& m = *impl_;
  if (!m.threads.empty()) throw IllegalTransition("pipeline already started");
  m.producer = std::move(producer);
  m.launch([&m] { m.ingest_stage(); });
  m.launch([&m] { m.transcribe_stage(); });
  m.launch([&m] { m.diarize_stage(); });
  m.launch([&m] { m.align_stage(); });
  m.launch([&m] { m.claim_stage(); });
}

void Pipeline::request_stop() {
  impl_->stop_requested = true;
  if (impl_->producer) impl_->producer->cancel();
}

void Pipeline::abort() {
  request_stop();
  impl_->aborting = true;
  impl_->diar_cv.notify_all();
}

bool Pipeline::wait_for(std::chrono::duration<double> timeout) {
  std::unique_lock lock(impl_->state_mutex);
  return impl_->done_cv.wait_for(lock, timeout, [&] { return impl_->running_stages == 0; });
}

void Pipeline::join() {
  for (auto& t : impl_->threads)
    if (t.joinable()) t.join();
  std::lock_guard lock(impl_->state_mutex);
  if (impl_->result == PipelineOutcome::running)
    impl_->result = impl_->stop_requested ? PipelineOutcome::stopped : PipelineOutcome::finished;
}

PipelineOutcome Pipeline::outcome() const {
  std::lock_guard lock(impl_->state_mutex);
  return impl_->result;
}

std::string Pipeline::failure_reason() const {
  std::lock_guard lock(impl_->state_mutex);
  return impl_->failure;
}

EndReason Pipeline::end_reason() const {
  std::lock_guard lock(impl_->state_mutex);
  return impl_->end;
}

PipelineMetrics Pipeline::metrics() const {
  std::lock_guard lock(impl_->metrics_mutex);
  return impl_->metrics;
}

StatsSnapshot Pipeline::stats() const {
  std::lock_guard lock(impl_->stats_mutex);
  return impl_->stats.snapshot();
}

}  // namespace streamcheck
