#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "streamcheck/audio.hpp"
#include "streamcheck/error.hpp"
#include "streamcheck/hls.hpp"
#include "streamcheck/ingest.hpp"
#include "test_support.hpp"

using namespace streamcheck;
using namespace streamcheck::testing;

namespace {

std::vector<AudioChunk> drain(ChunkProducer& p) {
  std::vector<AudioChunk> out;
  while (auto c = p.next()) out.push_back(std::move(*c));
  return out;
}

std::vector<AudioChunk> read_all(const std::string& locator, IngestOptions opts = {}) {
  auto p = open_stream(StreamSource::from_locator(locator), opts);
  return drain(*p);
}

void expect_gapless(const std::vector<AudioChunk>& chunks) {
  for (std::size_t k = 0; k + 1 < chunks.size(); ++k) {
    EXPECT_LT(std::abs(chunks[k + 1].start_time - chunks[k].end_time()), 1.0 / kCanonicalRate) << "at chunk " << k;
    EXPECT_EQ(chunks[k + 1].sequence_no, chunks[k].sequence_no + 1);
  }
  for (const auto& c : chunks)
    for (float s : c.samples) ASSERT_TRUE(s >= -1.0f && s <= 1.0f);
}

// Dominant frequency by a direct DFT over integer-Hz bins.
double dominant_frequency(const std::vector<float>& x, int rate, double max_hz) {
  const double n = static_cast<double>(x.size());
  double best = 0.0, best_f = 0.0;
  for (int bin = 1; bin < static_cast<int>(max_hz * n / rate); ++bin) {
    std::complex<double> acc = 0.0;
    const double w = -2.0 * M_PI * bin / n;
    for (std::size_t i = 0; i < x.size(); ++i) acc += static_cast<double>(x[i]) * std::polar(1.0, w * static_cast<double>(i));
    if (std::abs(acc) > best) {
      best = std::abs(acc);
      best_f = bin * rate / n;
    }
  }
  return best_f;
}

}  // namespace

TEST(Ingest, ExactDivisionGivesSixChunks) {
  TempDir dir;
  const auto path = dir.file("a.wav");
  write_wav_file(path, sine(220, 3.0), kCanonicalRate);
  const auto chunks = read_all(path);
  ASSERT_EQ(chunks.size(), 6u);
  for (std::size_t k = 0; k < 6; ++k) {
    EXPECT_EQ(chunks[k].sequence_no, k);
    EXPECT_DOUBLE_EQ(chunks[k].start_time, 0.5 * static_cast<double>(k));
    EXPECT_DOUBLE_EQ(chunks[k].duration, 0.5);
  }
  expect_gapless(chunks);
}

TEST(Ingest, RemainderChunkIsShort) {
  TempDir dir;
  const auto path = dir.file("b.wav");
  write_wav_file(path, sine(220, 3.2), kCanonicalRate);
  const auto chunks = read_all(path);
  ASSERT_EQ(chunks.size(), 7u);
  EXPECT_NEAR(chunks.back().duration, 0.2, 1e-9);
  expect_gapless(chunks);
}

TEST(Ingest, StereoAndResampledFilesBecomeCanonical) {
  TempDir dir;
  const auto path = dir.file("c.wav");
  write_wav_file(path, sine(440, 1.0, 48000), 48000);
  const auto chunks = read_all(path);
  ASSERT_EQ(chunks.size(), 2u);
  for (const auto& c : chunks) EXPECT_EQ(c.sample_rate, kCanonicalRate);
  EXPECT_EQ(chunks[0].samples.size(), 8000u);
}

TEST(Ingest, MissingFileIsUnreachable) {
  EXPECT_THROW(open_stream(StreamSource::from_locator("/nonexistent/missing.wav"), {}), UnreachableSource);
}

TEST(Ingest, NonWavWithoutAdapterIsUnsupported) {
  TempDir dir;
  const auto path = dir.write("x.mp3", "ID3 not really audio");
  EXPECT_THROW(read_all(path), UnsupportedCodec);
}

TEST(Ingest, ChunkDurationOutOfRangeIsInvalid) {
  TempDir dir;
  const auto path = dir.file("d.wav");
  write_wav_file(path, sine(220, 1.0), kCanonicalRate);
  IngestOptions opts;
  opts.chunk_duration = 5.0;
  EXPECT_THROW(open_stream(StreamSource::from_locator(path), opts), InvalidConfig);
}

TEST(Ingest, DecodeAdapterContract) {
  TempDir dir;
  const auto wav = dir.file("e.wav");
  write_wav_file(wav, sine(300, 1.0, 22050), 22050);
  const auto via_adapter = run_decode_adapter(STREAMCHECK_TEST_DECODE, wav);
  EXPECT_EQ(via_adapter.size(), 16000u);
  // The shipped adapter rejects non-WAV input; that surfaces as UnsupportedCodec.
  const auto junk = dir.write("f.bin", "garbage");
  EXPECT_THROW(run_decode_adapter(STREAMCHECK_TEST_DECODE, junk), UnsupportedCodec);
  // Files go through the adapter when one is configured.
  IngestOptions opts;
  opts.decode_adapter = STREAMCHECK_TEST_DECODE;
  const auto renamed = dir.write("g.media", read_file(wav));
  const auto chunks = read_all(renamed, opts);
  ASSERT_EQ(chunks.size(), 2u);
  expect_gapless(chunks);
}

TEST(Resample, IdentityKeepsSamples) {
  const auto x = sine(123, 0.3);
  EXPECT_EQ(resample_linear(x, 16000, 16000), x);
}

TEST(Resample, RatioLength) {
  std::vector<float> x(480, 0.25f);
  EXPECT_EQ(resample_linear(x, 48000, 16000).size(), 160u);
}

TEST(Resample, UnsupportedRateThrows) {
  std::vector<float> x(100, 0.0f);
  EXPECT_THROW(resample_linear(x, 12345, 16000), UnsupportedRate);
}

TEST(Resample, SineKeepsItsFrequency) {
  const auto x = sine(1000, 1.0, 48000);
  const auto y = resample_linear(x, 48000, 16000);
  ASSERT_EQ(y.size(), 16000u);
  EXPECT_NEAR(dominant_frequency(y, 16000, 2000), 1000.0, 5.0);
}

TEST(Wav, RoundTripWithinQuantization) {
  const auto x = sine(440, 0.1);
  const auto y = decode_wav(encode_wav(x, kCanonicalRate));
  ASSERT_EQ(y.samples.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y.samples[i], x[i], 1.0 / 32767);
}

TEST(Wav, GarbageIsUnsupported) { EXPECT_THROW(decode_wav("RIFFxxxxWAVE"), UnsupportedCodec); }

TEST(Slicer, GaplessForArbitraryPushSizes) {
  std::mt19937 rng(5);
  ChunkSlicer slicer(0.5);
  std::vector<AudioChunk> out;
  std::size_t total = 0;
  for (int i = 0; i < 200; ++i) {
    std::vector<float> piece(rng() % 7000, 0.1f);
    total += piece.size();
    slicer.push(piece, out);
  }
  slicer.finish(out);
  std::size_t sum = 0;
  for (const auto& c : out) sum += c.samples.size();
  EXPECT_EQ(sum, total);
  expect_gapless(out);
}

TEST(Hls, ParsesMediaAndMasterPlaylists) {
  const auto p = hls::parse_m3u8("#EXTM3U\n#EXT-X-TARGETDURATION:2\n#EXTINF:2.0,\na.ts\n#EXTINF:1.5,\nb.ts\n#EXT-X-ENDLIST\n");
  EXPECT_DOUBLE_EQ(p.target_duration, 2.0);
  ASSERT_EQ(p.segments.size(), 2u);
  EXPECT_EQ(p.segments[1].uri, "b.ts");
  EXPECT_TRUE(p.ended);
  const auto m = hls::parse_m3u8("#EXTM3U\n#EXT-X-STREAM-INF:BANDWIDTH=1\nlow/index.m3u8\n");
  EXPECT_TRUE(m.is_master());
  EXPECT_THROW(hls::parse_m3u8("hello"), UnsupportedCodec);
}

TEST(Hls, ResolvesReferences) {
  EXPECT_EQ(hls::resolve_uri("http://h/a/b/index.m3u8", "seg1.ts"), "http://h/a/b/seg1.ts");
  EXPECT_EQ(hls::resolve_uri("http://h/a/b/index.m3u8", "../c/seg1.ts"), "http://h/a/c/seg1.ts");
  EXPECT_EQ(hls::resolve_uri("http://h/a/b/index.m3u8", "/x.ts"), "http://h/x.ts");
  EXPECT_EQ(hls::resolve_uri("http://h/a/index.m3u8", "https://cdn/x.ts"), "https://cdn/x.ts");
}

TEST(HlsIngest, ThreeSegmentsTwelveChunksEachFetchedOnce) {
  HlsFixtureServer server({sine(220, 2.0), sine(330, 2.0), sine(440, 2.0)}, 2.0);
  const auto chunks = read_all(server.playlist_url());
  ASSERT_EQ(chunks.size(), 12u);
  expect_gapless(chunks);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(server.count("/live/seg" + std::to_string(i) + ".wav"), 1u);
}

TEST(HlsIngest, LivePlaylistIsPolledAndNeverRefetches) {
  HlsFixtureServer server({sine(220, 1.0), sine(330, 1.0), sine(440, 1.0), sine(550, 1.0)}, 1.0, /*live=*/true);
  IngestOptions opts;
  opts.min_poll_interval = 0.05;
  auto producer = open_stream(StreamSource::from_locator(server.playlist_url()), opts);
  const auto chunks = drain(*producer);
  EXPECT_EQ(producer->end_reason(), EndReason::playlist_ended);
  ASSERT_EQ(chunks.size(), 8u);
  expect_gapless(chunks);
  EXPECT_GE(server.count("/live/index.m3u8"), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(server.count("/live/seg" + std::to_string(i) + ".wav"), 1u);
}

TEST(HlsIngest, UnreachablePlaylist) {
  IngestOptions opts;
  opts.fetch_retries = 0;
  opts.http_timeout = 1.0;
  EXPECT_THROW(open_stream(StreamSource::from_locator("http://127.0.0.1:1/none.m3u8"), opts), UnreachableSource);
}

TEST(HlsIngest, UndecodableSegmentIsUnsupportedCodec) {
  HlsFixtureServer server({sine(220, 1.0)}, 1.0);
  server.corrupt_segments();
  auto producer = open_stream(StreamSource::from_locator(server.playlist_url()), {});
  EXPECT_THROW(drain(*producer), UnsupportedCodec);
}

TEST(Source, KindFromLocator) {
  EXPECT_EQ(StreamSource::from_locator("http://x/y.m3u8").kind, SourceKind::hls_playlist);
  EXPECT_EQ(StreamSource::from_locator("local.m3u8").kind, SourceKind::hls_playlist);
  EXPECT_EQ(StreamSource::from_locator("talk.wav").kind, SourceKind::local_file);
  EXPECT_THROW(StreamSource::from_locator("").validate(), InvalidConfig);
}
