#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "streamcheck/assignment.hpp"
#include "streamcheck/diarization.hpp"
#include "streamcheck/error.hpp"
#include "test_support.hpp"

using namespace streamcheck;
using namespace streamcheck::testing;

namespace {

std::vector<double> unit(std::vector<double> v) {
  double n = 0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
  return v;
}

std::vector<double> random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g;
  std::vector<double> v(dim);
  for (double& x : v) x = g(rng);
  return unit(v);
}

// Vector at cosine distance d from e0 in the (e0, e1) plane.
std::vector<double> at_distance(double d) {
  const double c = 1.0 - d;
  return {c, std::sqrt(1.0 - c * c), 0.0, 0.0};
}

ActivityMatrix matrix(std::size_t frames, std::size_t speakers, double frame = 0.1, float fill = 0.0f) {
  ActivityMatrix m;
  m.frames = frames;
  m.speakers = speakers;
  m.frame_duration = frame;
  m.probs.assign(frames * speakers, fill);
  return m;
}

// Independent oracle: minimum over every injective mapping of rows into
// columns that covers min(rows, cols) rows.
double brute_force_min(const CostMatrix& c) {
  const std::size_t r = c.rows(), k = c.cols();
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> cols(k);
  std::iota(cols.begin(), cols.end(), 0);
  if (r <= k) {
    do {
      double s = 0;
      for (std::size_t i = 0; i < r; ++i) s += c(i, cols[i]);
      best = std::min(best, s);
    } while (std::next_permutation(cols.begin(), cols.end()));
  } else {
    std::vector<std::size_t> rows(r);
    std::iota(rows.begin(), rows.end(), 0);
    do {
      double s = 0;
      for (std::size_t j = 0; j < k; ++j) s += c(rows[j], j);
      best = std::min(best, s);
    } while (std::next_permutation(rows.begin(), rows.end()));
  }
  return best;
}

}  // namespace

TEST(ActiveSpeakers, StrictlyBelowThresholdIsInactive) {
  auto m = matrix(10, 2, 0.1, 0.64f);
  EXPECT_TRUE(active_speakers(m, {}).empty());
}

TEST(ActiveSpeakers, FullActivityMasksEveryFrame) {
  auto m = matrix(10, 1, 0.1, 1.0f);
  const auto a = active_speakers(m, {});
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].mask, std::vector<bool>(10, true));
}

TEST(ActiveSpeakers, OverlappingSpeakersBothActive) {
  auto m = matrix(10, 2);
  for (std::size_t f = 0; f < 6; ++f) m.at(f, 0) = 0.9f;   // frames 1-6
  for (std::size_t f = 3; f < 10; ++f) m.at(f, 1) = 0.9f;  // frames 4-10
  const auto a = active_speakers(m, {});
  ASSERT_EQ(a.size(), 2u);
  for (std::size_t f = 3; f < 6; ++f) EXPECT_TRUE(a[0].mask[f] && a[1].mask[f]);
  EXPECT_FALSE(a[0].mask[7]);
  EXPECT_FALSE(a[1].mask[0]);
}

TEST(ActiveSpeakers, FractionBoundaryIsInclusive) {
  auto m = matrix(10, 1);
  for (std::size_t f = 0; f < 5; ++f) m.at(f, 0) = 0.9f;
  EXPECT_EQ(active_speakers(m, {}).size(), 1u);
  m.at(4, 0) = 0.65f;  // not strictly above tau_active
  EXPECT_TRUE(active_speakers(m, {}).empty());
}

TEST(Assign, EmptyStoreFoundsFirstSpeaker) {
  CentroidStore store;
  const std::vector<SpeakerEmbedding> e{make_embedding({1, 0, 0, 0}, 0)};
  const auto plan = assign(e, store, 0.75);
  EXPECT_EQ(plan.founders, std::vector<std::size_t>{0});
  EXPECT_EQ(plan.speaker_ids[0], "SPEAKER_00");
}

TEST(Assign, NearEmbeddingJoinsFarEmbeddingFounds) {
  CentroidStore store;
  store.add({1, 0, 0, 0});
  auto near = assign({make_embedding(at_distance(0.2), 0)}, store, 0.75);
  EXPECT_EQ(near.speaker_ids[0], "SPEAKER_00");
  EXPECT_TRUE(near.founders.empty());
  auto far = assign({make_embedding(at_distance(0.8), 0)}, store, 0.75);
  EXPECT_EQ(far.speaker_ids[0], "SPEAKER_01");
  EXPECT_EQ(far.founders.size(), 1u);
}

TEST(Assign, LocalsOutnumberingCentroidsFoundTheRest) {
  CentroidStore store;
  store.add({1, 0, 0, 0});
  const auto plan = assign({make_embedding(at_distance(0.1), 0), make_embedding(at_distance(0.3), 1)}, store, 0.75);
  EXPECT_EQ(plan.speaker_ids[0], "SPEAKER_00");
  EXPECT_EQ(plan.speaker_ids[1], "SPEAKER_01");
}

TEST(Assign, ThreeByThreeMatchesBruteForce) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    CostMatrix c(3, 3);
    std::vector<std::vector<double>> locals, cents;
    for (int i = 0; i < 3; ++i) locals.push_back(random_unit(rng, 8));
    for (int i = 0; i < 3; ++i) cents.push_back(random_unit(rng, 8));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) c(i, j) = cosine_distance(locals[i], cents[j]);
    const double oracle = brute_force_min(c);
    EXPECT_EQ(solve_exhaustive(c).total_cost, oracle);
    const auto h = solve_hungarian(c);
    EXPECT_EQ(assignment_cost(c, h.row_to_col), oracle) << "trial " << trial;
  }
}

TEST(Assign, RectangularHungarianMatchesBruteForce) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t r = 1 + rng() % 6, k = 1 + rng() % 6;
    CostMatrix c(r, k);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < k; ++j) c(i, j) = u(rng);
    const auto h = solve_hungarian(c);
    std::set<std::size_t> used;
    std::size_t matched = 0;
    for (const auto& col : h.row_to_col)
      if (col) {
        EXPECT_TRUE(used.insert(*col).second) << "not injective";
        ++matched;
      }
    EXPECT_EQ(matched, std::min(r, k));
    EXPECT_NEAR(h.total_cost, brute_force_min(c), 1e-12);
  }
}

TEST(Assign, EmptyInputs) {
  CostMatrix none(0, 3);
  EXPECT_EQ(solve_min_cost(none).total_cost, 0.0);
  CentroidStore store;
  EXPECT_TRUE(assign({}, store, 0.75).founders.empty());
}

TEST(Centroids, TwoPointMeanAndNewCentroid) {
  CentroidStore store;
  const auto e1 = unit({1, 0.2, 0, 0});
  const auto e2 = unit({0.3, 1, 0.1, 0});
  store.add(e1);
  EXPECT_EQ(store.centroid(0), e1);
  store.update(0, e2);
  std::vector<double> mean(4);
  for (int i = 0; i < 4; ++i) mean[i] = (e1[i] + e2[i]) / 2;
  const auto expected = unit(mean);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(store.centroid(0)[i], expected[i], 1e-12);
  EXPECT_EQ(store.count(0), 2u);
}

TEST(Centroids, SequentialEqualsBatchMean) {
  std::mt19937_64 rng(3);
  std::vector<std::vector<double>> es;
  for (int i = 0; i < 5; ++i) es.push_back(random_unit(rng, 6));
  CentroidStore store;
  store.add(es[0]);
  for (int i = 1; i < 5; ++i) store.update(0, es[i]);
  std::vector<double> sum(6, 0.0);
  for (const auto& e : es)
    for (int d = 0; d < 6; ++d) sum[d] += e[d];
  const auto batch = unit(sum);
  for (int d = 0; d < 6; ++d) EXPECT_NEAR(store.centroid(0)[d], batch[d], 1e-9);
}

TEST(Embedding, RejectsDegenerateVectors) {
  EXPECT_THROW(make_embedding({}, 0), BackendError);
  EXPECT_THROW(make_embedding({0, 0}, 0), BackendError);
  EXPECT_THROW(make_embedding({1, std::nan("")}, 0), BackendError);
  EXPECT_NEAR(make_embedding({3, 4}, 0).vector[0], 0.6, 1e-12);
}

TEST(EmitTimeline, FirstHopOfFullWindow) {
  LocalSpeaker s{0, std::vector<bool>(50, true)};
  DiarizationParams p;
  const auto out = emit_timeline({s}, {"SPEAKER_00"}, 0.1, 0.0, p);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].speaker_id, "SPEAKER_00");
  EXPECT_NEAR(out[0].t_start, 4.5, 1e-9);
  EXPECT_NEAR(out[0].t_end, 5.0, 1e-9);
}

TEST(EmitTimeline, NoActiveSpeakersNoIntervals) {
  EXPECT_TRUE(emit_timeline({}, {}, 0.1, 0.0, {}).empty());
}

TEST(EmitTimeline, ConsecutiveHopsMergeIntoOneSecond) {
  LocalSpeaker s{0, std::vector<bool>(50, true)};
  DiarizationParams p;
  SpeakerTimeline tl(p.merge_gap);
  for (const auto& i : emit_timeline({s}, {"SPEAKER_00"}, 0.1, 0.0, p)) tl.add(i);
  for (const auto& i : emit_timeline({s}, {"SPEAKER_00"}, 0.1, 0.5, p)) tl.add(i);
  const auto all = tl.intervals();
  ASSERT_EQ(all.size(), 1u);
  EXPECT_NEAR(all[0].t_end - all[0].t_start, 1.0, 1e-9);
}

TEST(Timeline, MergesWithinGapAndKeepsSpeakersApart) {
  SpeakerTimeline tl(0.25);
  tl.add({"A", 0.0, 1.0});
  tl.add({"A", 1.2, 2.0});
  tl.add({"A", 3.0, 4.0});
  tl.add({"B", 1.0, 1.5});
  EXPECT_EQ(tl.intervals_of("A").size(), 2u);
  EXPECT_DOUBLE_EQ(tl.talk_time("A"), 3.0);
  EXPECT_DOUBLE_EQ(tl.talk_time("B"), 0.5);
  EXPECT_EQ(tl.speakers(), (std::vector<std::string>{"A", "B"}));
}

TEST(RollingBuffer, StartsZeroFilledAndAdvancesByHop) {
  RollingBuffer b(5.0, 0.5);
  b.push(std::vector<float>(8000, 1.0f));
  ASSERT_TRUE(b.hop_ready());
  const auto w = b.advance();
  EXPECT_EQ(w.samples.size(), 80000u);
  EXPECT_DOUBLE_EQ(w.start_time, -4.5);
  EXPECT_EQ(w.samples.front(), 0.0f);
  EXPECT_EQ(w.samples.back(), 1.0f);
  EXPECT_FALSE(b.hop_ready());
}

namespace {

// Two speakers alternating in 4 s turns, scripted straight from the truth.
struct ScriptedDiarization {
  bool permute = false;
  std::shared_ptr<FnSegmentation> seg;
  std::shared_ptr<FnEmbedding> emb;

  explicit ScriptedDiarization(bool p) : permute(p) {
    auto speaker_at = [](double t) { return static_cast<int>(std::floor(t / 4.0)) % 2; };
    seg = std::make_shared<FnSegmentation>([speaker_at, this](const AudioWindow& w) {
      ActivityMatrix m = matrix(50, 3);
      for (std::size_t f = 0; f < 50; ++f) {
        const double t = w.start_time + 0.1 * static_cast<double>(f) + 0.05;
        if (t < 0) continue;
        std::size_t col = static_cast<std::size_t>(speaker_at(t));
        if (permute) col = (col + static_cast<std::size_t>((std::llround(w.start_time * 2) % 3 + 3) % 3)) % 3;
        m.at(f, col) = 0.95f;
      }
      return m;
    });
    emb = std::make_shared<FnEmbedding>([speaker_at](const AudioWindow& w, const std::vector<bool>& mask, double fd) {
      for (std::size_t f = 0; f < mask.size(); ++f)
        if (mask[f]) {
          const int s = speaker_at(w.start_time + fd * static_cast<double>(f) + fd / 2);
          return s == 0 ? std::vector<double>{1, 0.1, 0, 0} : std::vector<double>{0.1, 1, 0, 0};
        }
      return std::vector<double>{1, 1, 1, 1};
    });
  }
};

std::vector<SpeakerInterval> run_diarizer(bool permute) {
  ScriptedDiarization s(permute);
  OnlineDiarizer d(s.seg, s.emb);
  for (int k = 0; k < 40; ++k) d.push(chunk_of(std::vector<float>(8000, 0.1f), 0.5 * k, k));
  d.finish(20.0);
  return d.timeline().intervals();
}

}  // namespace

TEST(OnlineDiarizer, AlternatingSpeakersGetStableIds) {
  const auto intervals = run_diarizer(false);
  ASSERT_FALSE(intervals.empty());
  std::set<std::string> ids;
  for (const auto& i : intervals) ids.insert(i.speaker_id);
  EXPECT_EQ(ids, (std::set<std::string>{"SPEAKER_00", "SPEAKER_01"}));
  EXPECT_EQ(intervals.front().speaker_id, "SPEAKER_00");
}

TEST(OnlineDiarizer, ColumnPermutationLeavesTimelineUnchanged) {
  EXPECT_EQ(run_diarizer(false), run_diarizer(true));
}

TEST(OnlineDiarizer, SegmentationFailureSkipsHop) {
  auto seg = std::make_shared<FnSegmentation>([](const AudioWindow&) -> ActivityMatrix { throw BackendError("no"); });
  auto emb = std::make_shared<FnEmbedding>([](const AudioWindow&, const std::vector<bool>&, double) {
    return std::vector<double>{1, 0};
  });
  OnlineDiarizer d(seg, emb);
  const auto hops = d.push(chunk_of(std::vector<float>(8000, 0.1f), 0.0, 0));
  ASSERT_EQ(hops.size(), 1u);
  EXPECT_TRUE(hops[0].skipped);
  EXPECT_DOUBLE_EQ(d.covered_until(), 0.5);
}

TEST(DiarizationParams, Validation) {
  DiarizationParams p;
  p.tau_active = 1.5;
  EXPECT_THROW(p.validate(), InvalidConfig);
  p = {};
  p.delta_new = 0.0;
  EXPECT_THROW(p.validate(), InvalidConfig);
  DiarizationParams{}.validate();
}
