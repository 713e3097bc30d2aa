// Renders the "audio" tone program of a fixture to a 16 kHz mono WAV.
#include <iostream>

#include "streamcheck/audio.hpp"
#include "streamcheck/mock_backends.hpp"

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: streamcheck-fixture-audio <fixture.json> <out.wav>\n";
    return 64;
  }
  try {
    const auto script = streamcheck::load_script(argv[1]);
    const auto samples = streamcheck::render_fixture_audio(script);
    streamcheck::write_wav_file(argv[2], samples, streamcheck::kCanonicalRate);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "streamcheck-fixture-audio: " << e.what() << "\n";
    return 1;
  }
}
