#include "streamcheck/stats.hpp"

#include <algorithm>

#include "streamcheck/alignment.hpp"
#include "streamcheck/error.hpp"

namespace streamcheck {

namespace {

std::map<char, std::size_t> empty_topics() {
  std::map<char, std::size_t> t;
  for (char c = 'A'; c <= 'H'; ++c) t[c] = 0;
  return t;
}

}  // namespace

Json StatsSnapshot::to_json() const {
  Json speakers_json = Json::array();
  for (const auto& s : speakers) {
    speakers_json.push_back({{"speaker_id", s.speaker_id},
                             {"talk_time_seconds", s.talk_time_seconds},
                             {"claims_total", s.claims_total},
                             {"supported", s.supported},
                             {"disputed", s.disputed},
                             {"unverified", s.unverified}});
  }
  Json topics_json = Json::object();
  for (const auto& [t, n] : topics) topics_json[std::string(1, t)] = n;
  return {{"speakers", speakers_json}, {"topics", topics_json}, {"session_clock", session_clock},
          {"verdicts", verdicts}};
}

StatsSnapshot StatsSnapshot::from_json(const Json& j) {
  StatsSnapshot s;
  s.topics = empty_topics();
  try {
    for (const auto& sp : j.at("speakers")) {
      SpeakerStats st;
      st.speaker_id = sp.at("speaker_id").get<std::string>();
      st.talk_time_seconds = sp.at("talk_time_seconds").get<double>();
      st.claims_total = sp.at("claims_total").get<std::size_t>();
      st.supported = sp.at("supported").get<std::size_t>();
      st.disputed = sp.at("disputed").get<std::size_t>();
      st.unverified = sp.at("unverified").get<std::size_t>();
      s.speakers.push_back(st);
    }
    for (const auto& [k, v] : j.at("topics").items()) s.topics[k.empty() ? 'H' : k[0]] = v.get<std::size_t>();
    s.session_clock = j.at("session_clock").get<double>();
    s.verdicts = j.at("verdicts").get<std::size_t>();
  } catch (const Json::exception& e) {
    throw SchemaViolation("stats", std::string("malformed stats snapshot: ") + e.what());
  }
  return s;
}

SessionStats::SessionStats(double merge_gap) : timeline_(merge_gap), topics_(empty_topics()) {}

void SessionStats::apply(const SessionEvent& event) {
  clock_ = std::max(clock_, event.stream_time);
  const Json& p = event.payload;
  if (event.kind == EventKind::timeline) {
    for (const auto& iv : p.value("intervals", Json::array())) {
      timeline_.add({iv.at("speaker_id").get<std::string>(), iv.at("t_start").get<double>(),
                     iv.at("t_end").get<double>()});
    }
  } else if (event.kind == EventKind::verdict) {
    std::string speaker = p.value("speaker_id", std::string(kUnknownSpeaker));
    if (timeline_.intervals_of(speaker).empty()) speaker = kUnknownSpeaker;
    auto& st = claims_[speaker];
    st.speaker_id = speaker;
    ++st.claims_total;
    const std::string label = p.value("label", std::string("Unverified"));
    if (label == "Supported") {
      ++st.supported;
    } else if (label == "Refuted") {
      ++st.disputed;
    } else {
      ++st.unverified;
    }
    const std::string topic = p.value("topic", std::string("H"));
    const char t = topic.size() == 1 && topic[0] >= 'A' && topic[0] <= 'H' ? topic[0] : 'H';
    ++topics_[t];
    ++verdicts_;
  }
}

StatsSnapshot SessionStats::snapshot() const {
  StatsSnapshot s;
  std::map<std::string, SpeakerStats> merged = claims_;
  for (const auto& id : timeline_.speakers()) {
    auto& st = merged[id];
    st.speaker_id = id;
    st.talk_time_seconds = timeline_.talk_time(id);
  }
  for (auto& [id, st] : merged) s.speakers.push_back(st);
  s.topics = topics_;
  s.session_clock = clock_;
  s.verdicts = verdicts_;
  return s;
}

}  // namespace streamcheck
