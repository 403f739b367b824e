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

#include "skimnet/synth/audio.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>

#include "skimnet/binary_io.hpp"
#include "skimnet/error.hpp"

namespace skimnet::synth {

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::uint16_t read_u16(std::istream& in) {
  unsigned char b[2];
  io::read_exact(in, reinterpret_cast<char*>(b), 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

void write_u16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  out.write(b, 2);
}

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

PcmAudio read_wav(std::istream& in) {
  char tag[4];
  try {
    io::read_exact(in, tag, 4);
    if (std::memcmp(tag, "RIFF", 4) != 0) throw InputError("not a RIFF file");
    io::read_u32(in);
    io::read_exact(in, tag, 4);
    if (std::memcmp(tag, "WAVE", 4) != 0) throw InputError("RIFF file is not WAVE");

    PcmAudio audio;
    bool have_fmt = false;
    while (true) {
      io::read_exact(in, tag, 4);
      const std::uint32_t size = io::read_u32(in);
      if (std::memcmp(tag, "fmt ", 4) == 0) {
        const std::uint16_t format = read_u16(in);
        audio.channels = read_u16(in);
        audio.sample_rate = static_cast<int>(io::read_u32(in));
        io::read_u32(in);  // byte rate
        read_u16(in);      // block align
        const std::uint16_t bits = read_u16(in);
        if (format != 1) throw InputError("only PCM WAV (format 1) is supported");
        if (bits != 16) throw InputError("only 16-bit PCM is supported");
        if (audio.channels != 1 && audio.channels != 2) throw InputError("only mono or stereo WAV is supported");
        if (size > 16) in.ignore(size - 16);
        have_fmt = true;
      } else if (std::memcmp(tag, "data", 4) == 0) {
        if (!have_fmt) throw InputError("WAV data chunk before fmt chunk");
        audio.samples.resize(size / 2);
        for (auto& s : audio.samples) s = static_cast<std::int16_t>(read_u16(in));
        return audio;
      } else {
        in.ignore(size + (size & 1));
      }
    }
  } catch (const IoError&) {
    throw InputError("truncated WAV stream");
  }
}

PcmAudio read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::kMissingFile, "cannot open " + path.string());
  return read_wav(in);
}

void write_wav(std::ostream& out, const PcmAudio& audio) {
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  out.write("RIFF", 4);
  io::write_u32(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  io::write_u32(out, 16);
  write_u16(out, 1);
  write_u16(out, static_cast<std::uint16_t>(audio.channels));
  io::write_u32(out, static_cast<std::uint32_t>(audio.sample_rate));
  io::write_u32(out, static_cast<std::uint32_t>(audio.sample_rate * audio.channels * 2));
  write_u16(out, static_cast<std::uint16_t>(audio.channels * 2));
  write_u16(out, 16);
  out.write("data", 4);
  io::write_u32(out, data_bytes);
  for (auto s : audio.samples) write_u16(out, static_cast<std::uint16_t>(s));
}

PcmAudio to_mono(const PcmAudio& audio) {
  if (audio.channels == 1) return audio;
  PcmAudio mono;
  mono.sample_rate = audio.sample_rate;
  mono.channels = 1;
  const std::size_t frames = audio.frames();
  mono.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    long sum = 0;
    for (int c = 0; c < audio.channels; ++c) sum += audio.samples[i * audio.channels + c];
    mono.samples[i] = static_cast<std::int16_t>(std::lround(static_cast<double>(sum) / audio.channels));
  }
  return mono;
}

std::size_t spectrogram_fft_size(int sample_rate, const SpectrogramConfig& cfg) {
  const auto win = static_cast<std::size_t>(std::lround(cfg.window_seconds * sample_rate));
  std::size_t n = 1;
  while (n < win) n <<= 1;
  return n;
}

numerics::Tensor mel_filterbank(int sample_rate, std::size_t fft_size, std::size_t bands) {
  const std::size_t bins = fft_size / 2 + 1;
  numerics::Tensor fb({bands, bins});
  const double mel_max = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(bands + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / static_cast<double>(bands + 1));
  }
  for (std::size_t b = 0; b < bands; ++b) {
    const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double hz = static_cast<double>(k) * sample_rate / static_cast<double>(fft_size);
      double w = 0.0;
      if (hz > lo && hz <= mid) w = (hz - lo) / (mid - lo);
      else if (hz > mid && hz < hi) w = (hi - hz) / (hi - mid);
      fb.at(b, k) = w;
    }
  }
  return fb;
}

double mel_band_center_hz(int sample_rate, std::size_t bands, std::size_t b) {
  const double mel_max = hz_to_mel(sample_rate / 2.0);
  return mel_to_hz(mel_max * static_cast<double>(b + 1) / static_cast<double>(bands + 1));
}

Spectrogram wav_to_spectrogram(const PcmAudio& audio, const SpectrogramConfig& cfg) {
  if (audio.channels != 1) {
    throw InputError("wav_to_spectrogram: expected mono input, got " + std::to_string(audio.channels) +
                     " channels");
  }
  if (audio.sample_rate < 8000) throw InputError("wav_to_spectrogram: sample rate below 8 kHz");
  const std::size_t n = audio.samples.size();
  if (n < static_cast<std::size_t>(audio.sample_rate)) {
    throw InputError("wav_to_spectrogram: need at least 1 s of audio, got " + std::to_string(n) + " samples");
  }
  const int sr = audio.sample_rate;
  const auto win = static_cast<std::size_t>(std::lround(cfg.window_seconds * sr));
  const std::size_t nfft = spectrogram_fft_size(sr, cfg);
  const std::size_t bins = nfft / 2 + 1;
  const double frames_per_second = 1.0 / cfg.hop_seconds;
  // Frames sit at t = k * hop for every t inside the signal.
  const auto frames = 1 + static_cast<std::size_t>(std::floor(
                              static_cast<double>(n) * std::llround(frames_per_second) / sr + 1e-9));

  std::vector<double> hann(win);
  for (std::size_t i = 0; i < win; ++i) {
    hann[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(win - 1));
  }
  const numerics::Tensor fb = mel_filterbank(sr, nfft, cfg.bands);

  std::vector<double> buffer(nfft);
  std::vector<fftw_complex> spectrum(bins);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), buffer.data(), spectrum.data(), FFTW_ESTIMATE);
  }

  Spectrogram out;
  out.values = numerics::Tensor({frames, cfg.bands});
  out.sample_rate = sr;
  out.hop_seconds = cfg.hop_seconds;
  out.window_seconds = cfg.window_seconds;
  std::vector<double> power(bins);
  for (std::size_t k = 0; k < frames; ++k) {
    const auto center = static_cast<long>(std::llround(static_cast<double>(k) * cfg.hop_seconds * sr));
    const long first = center - static_cast<long>(win / 2);
    std::fill(buffer.begin(), buffer.end(), 0.0);
    for (std::size_t i = 0; i < win; ++i) {
      const long idx = first + static_cast<long>(i);
      if (idx >= 0 && idx < static_cast<long>(n)) buffer[i] = hann[i] * (audio.samples[idx] / 32768.0);
    }
    fftw_execute(plan);
    for (std::size_t b = 0; b < bins; ++b) power[b] = spectrum[b][0] * spectrum[b][0] + spectrum[b][1] * spectrum[b][1];
    for (std::size_t band = 0; band < cfg.bands; ++band) {
      double energy = 0.0;
      for (std::size_t b = 0; b < bins; ++b) energy += fb.at(band, b) * power[b];
      out.values.at(k, band) = std::log(cfg.log_floor + energy);
    }
  }
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace skimnet::synth
