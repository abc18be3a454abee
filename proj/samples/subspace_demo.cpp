// samples/subspace_demo.cpp

// Copyright 2026  The stsb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Renders one word for a control speaker and for a severely impaired one,
// then prints how the spectro-temporal subspaces of the two differ.
//
//   subspace_demo [word-index]

#include <cstdio>
#include <cstdlib>

#include "stsb/stsb.hpp"

using namespace stsb;

namespace {

void describe(const char *label, const synth::SpeakerProfile &p, const synth::WordTemplate &word) {
  const Waveform w = synth::synthesize(word, p, stage_seed(1, label));
  const ExtractOptions opt;
  const MelSpectrogram m = mel_spectrogram(preprocess(w, opt), opt.front_end);
  const SubspaceDecomposition dec = decompose(m);
  const double total = dec.sigma.squaredNorm();

  std::printf("%s: %.0f ms, %ld frames x %ld channels\n", label, 1000.0 * w.samples.size() / w.sample_rate,
              static_cast<long>(m.values.cols()), static_cast<long>(m.values.rows()));
  std::printf("  energy in leading components:");
  double acc = 0.0;
  for (Index i = 0; i < std::min<Index>(5, dec.sigma.size()); ++i) {
    acc += dec.sigma(i) * dec.sigma(i);
    std::printf(" %.3f", acc / total);
  }
  std::printf("\n  rank-2 reconstruction error: %.4f\n",
              (m.values - low_rank(dec, 2)).norm() / m.values.norm());

  const UtteranceFeature f = utterance_feature(m, opt.subspace, {p.speaker_id, "B1", word.id, p.severity});
  std::printf("  feature: %ld spectral + %ld temporal values\n", static_cast<long>(f.spectral.size()),
              static_cast<long>(f.temporal.size()));
}

}  // namespace

int main(int argc, char **argv) {
  const auto vocab = synth::default_vocabulary();
  const int k = argc > 1 ? std::atoi(argv[1]) : 5;
  if (k < 0 || k >= static_cast<int>(vocab.size())) {
    std::fprintf(stderr, "word index must lie in [0, %zu)\n", vocab.size());
    return 2;
  }
  synth::SpeakerProfile ctl;
  ctl.speaker_id = "C01";

  synth::SpeakerProfile vl;
  vl.speaker_id = "D01";
  vl.severity = Intelligibility::VL;
  vl.tilt_db_per_octave = -6.0;
  vl.rate_factor = 0.55;
  vl.pause_prob = 0.5;
  vl.noise_db = -15.0;

  std::printf("word %s\n", vocab[static_cast<std::size_t>(k)].id.c_str());
  describe("control", ctl, vocab[static_cast<std::size_t>(k)]);
  describe("very low", vl, vocab[static_cast<std::size_t>(k)]);
  return 0;
}
