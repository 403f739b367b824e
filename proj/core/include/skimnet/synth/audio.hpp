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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "skimnet/numerics/tensor.hpp"

namespace skimnet::synth {

/// Interleaved 16-bit PCM.
struct PcmAudio {
  int sample_rate = 16000;
  int channels = 1;
  std::vector<std::int16_t> samples;

  std::size_t frames() const { return channels > 0 ? samples.size() / static_cast<std::size_t>(channels) : 0; }
};

/// RIFF/WAVE reader for 16-bit PCM, mono or stereo.
PcmAudio read_wav(std::istream& in);
PcmAudio read_wav(const std::filesystem::path& path);
void write_wav(std::ostream& out, const PcmAudio& audio);

/// Averages channels (rounding to nearest) into a mono signal.
PcmAudio to_mono(const PcmAudio& audio);

struct SpectrogramConfig {
  double window_seconds = 0.025;
  double hop_seconds = 0.010;
  std::size_t bands = 40;
  double log_floor = 1e-10;
};

struct Spectrogram {
  numerics::Tensor values;  // [frames x bands], log(floor + band energy)
  int sample_rate = 0;
  double hop_seconds = 0.0;
  double window_seconds = 0.0;

  std::size_t frames() const { return values.rows(); }
  std::size_t bands() const { return values.cols(); }
};

/// Short-time log-mel analysis: Hann window, frames centered at multiples of
/// the hop starting at t = 0 with zero padding at the edges, so a one-second
/// input yields 101 frames. Requires mono input of at least one second at
/// >= 8 kHz.
Spectrogram wav_to_spectrogram(const PcmAudio& audio, const SpectrogramConfig& cfg = {});

/// FFT length used for a sample rate (next power of two >= window length).
std::size_t spectrogram_fft_size(int sample_rate, const SpectrogramConfig& cfg = {});

/// Triangular mel filterbank, [bands x (fft_size/2 + 1)]; HTK mel scale
/// spanning 0 Hz to Nyquist.
numerics::Tensor mel_filterbank(int sample_rate, std::size_t fft_size, std::size_t bands);

/// Peak frequency (Hz) of mel band b.
double mel_band_center_hz(int sample_rate, std::size_t bands, std::size_t b);

}  // namespace skimnet::synth
