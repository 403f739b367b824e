// Copyright 2026 The SkimNet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Log-mel spectrogram of a PCM16 WAV file, one CSV row per frame.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "skimnet/cli/commands.hpp"
#include "skimnet/error.hpp"
#include "skimnet/format.hpp"
#include "skimnet/synth/audio.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Convert a WAV file to a log-mel spectrogram (CSV, frames x bands)"};
  std::string input, output;
  skimnet::synth::SpectrogramConfig cfg;
  app.add_option("input", input, "PCM16 WAV file")->required();
  app.add_option("-o,--output", output, "CSV output (default: stdout)");
  app.add_option("--bands", cfg.bands, "number of mel bands")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    // Stereo is averaged to mono.
    const skimnet::synth::PcmAudio pcm = skimnet::synth::to_mono(skimnet::synth::read_wav(input));
    const auto spec = skimnet::synth::wav_to_spectrogram(pcm, cfg);
    std::ofstream file;
    if (!output.empty()) {
      file.open(output, std::ios::binary | std::ios::trunc);
      if (!file) throw skimnet::IoError("cannot open " + output + " for writing");
    }
    std::ostream& out = output.empty() ? std::cout : file;
    const std::size_t frames = spec.values.rows(), bands = spec.values.cols();
    for (std::size_t b = 0; b < bands; ++b) out << (b ? "," : "") << "mel" << b;
    out << '\n';
    for (std::size_t f = 0; f < frames; ++f) {
      for (std::size_t b = 0; b < bands; ++b) out << (b ? "," : "") << skimnet::format_double(spec.values.at(f, b));
      out << '\n';
    }
    std::cerr << frames << " frames x " << bands << " bands\n";
    return 0;
  } catch (const skimnet::Error& e) {
    const int code = skimnet::category_exit_code(e.category());
    std::cerr << skimnet::cli::error_json(std::string(skimnet::category_name(e.category())), e.what(), code) << '\n';
    return code;
  }
}
