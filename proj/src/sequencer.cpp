#include "streamcheck/sequencer.hpp"

#include <algorithm>
#include <tuple>

#include "streamcheck/error.hpp"

namespace streamcheck {

Sequencer::Sequencer(std::size_t lanes, Sink sink) : sink_(std::move(sink)), lanes_(lanes) {}

void Sequencer::push(std::size_t lane, PendingEvent event) {
  std::lock_guard lock(mutex_);
  Lane& l = lanes_.at(lane);
  if (l.closed) throw Error("push on a closed sequencer lane");
  const double floor = l.items.empty() ? l.watermark : std::max(l.watermark, l.items.back().second.stream_time);
  if (event.stream_time < floor) event.stream_time = floor;  // lane contract; keeps the merge monotone
  l.items.emplace_back(l.next_seq++, std::move(event));
  drain_locked();
}

void Sequencer::advance(std::size_t lane, double watermark) {
  std::lock_guard lock(mutex_);
  Lane& l = lanes_.at(lane);
  if (watermark <= l.watermark) return;
  l.watermark = watermark;
  drain_locked();
}

void Sequencer::close(std::size_t lane) {
  std::lock_guard lock(mutex_);
  lanes_.at(lane).closed = true;
  drain_locked();
}

bool Sequencer::all_closed() const {
  std::lock_guard lock(mutex_);
  return std::all_of(lanes_.begin(), lanes_.end(), [](const Lane& l) { return l.closed && l.items.empty(); });
}

std::size_t Sequencer::pending() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& l : lanes_) n += l.items.size();
  return n;
}

void Sequencer::drain_locked() {
  for (;;) {
    std::size_t best = lanes_.size();
    for (std::size_t i = 0; i < lanes_.size(); ++i) {
      if (lanes_[i].items.empty()) continue;
      if (best == lanes_.size()) {
        best = i;
        continue;
      }
      const auto& a = lanes_[i].items.front();
      const auto& b = lanes_[best].items.front();
      if (std::tie(a.second.stream_time, i, a.first) < std::tie(b.second.stream_time, best, b.first)) best = i;
    }
    if (best == lanes_.size()) return;
    const double t = lanes_[best].items.front().second.stream_time;
    for (std::size_t i = 0; i < lanes_.size(); ++i) {
      const Lane& l = lanes_[i];
      if (i == best || l.closed || !l.items.empty()) continue;
      // A future item of lane i has key (>= watermark, i, ...).
      const bool later = l.watermark > t || (l.watermark == t && i > best);
      if (!later) return;
    }
    PendingEvent ev = std::move(lanes_[best].items.front().second);
    lanes_[best].items.pop_front();
    sink_(std::move(ev));
  }
}

}  // namespace streamcheck
