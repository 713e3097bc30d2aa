// Reference decode adapter: `streamcheck-decode <input> s16le <rate> <channels>`.
// Decodes WAV input and writes raw little-endian 16-bit samples to stdout.
// Anything else exits non-zero, which the engine reports as UnsupportedCodec.
#include <cstdio>
#include <iostream>
#include <string>

#include "streamcheck/audio.hpp"

int main(int argc, char** argv) {
  if (argc != 5 || std::string(argv[2]) != "s16le") {
    std::cerr << "usage: streamcheck-decode <input> s16le <rate> <channels>\n";
    return 64;
  }
  try {
    const int rate = std::stoi(argv[3]);
    const int channels = std::stoi(argv[4]);
    if (channels != 1) throw std::runtime_error("only mono output is supported");
    const auto pcm = streamcheck::read_wav_file(argv[1]);
    const auto samples = streamcheck::resample_linear(pcm.samples, pcm.sample_rate, rate);
    const std::string bytes = streamcheck::float_to_s16le(samples);
    std::fwrite(bytes.data(), 1, bytes.size(), stdout);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "streamcheck-decode: " << e.what() << "\n";
    return 1;
  }
}
