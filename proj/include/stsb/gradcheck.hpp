// stsb/gradcheck.hpp

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


#ifndef STSB_GRADCHECK_HPP
#define STSB_GRADCHECK_HPP

#include <random>
#include <string>
#include <vector>

#include "stsb/classifier.hpp"
#include "stsb/neural/network.hpp"
#include "stsb/neural/train.hpp"

namespace stsb {

struct GradCheckCase {
  std::string name;
  nn::GradCheckReport report;
};

namespace detail {

inline GradCheckCase run_grad_case(const std::string &name, const nn::NetworkSpec &spec, int speakers,
                                   Index rows, std::size_t max_coords, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  nn::Network<double> net(spec, seed);
  for (int s = 0; s < speakers; ++s) net.speaker_slot("s" + std::to_string(s));
  for (auto &t : net.tensors())
    if (t.lhuc) t.value = t.value.unaryExpr([&](double) { return 0.5 * nd(rng); });

  nn::Batch<double> b;
  b.inputs = Mat<double>::NullaryExpr(rows, spec.input_dim, [&] { return nd(rng); });
  if (spec.heads.empty()) {
    b.targets.push_back(Mat<double>::NullaryExpr(rows, spec.trunk_dim(), [&] { return nd(rng); }));
    b.weights = {1.0};
  } else {
    for (const auto &h : spec.heads) {
      std::uniform_int_distribution<int> cls(0, static_cast<int>(h.layers.back().out_dim) - 1);
      std::vector<int> y(static_cast<std::size_t>(rows));
      for (auto &v : y) v = cls(rng);
      b.labels.push_back(std::move(y));
      b.weights.push_back(1.0 / static_cast<double>(spec.heads.size()));
    }
  }
  if (speakers > 0) {
    std::uniform_int_distribution<int> spk(0, speakers - 1);
    b.speakers.resize(static_cast<std::size_t>(rows));
    for (auto &s : b.speakers) s = spk(rng);
  }
  return {name, nn::grad_check(net, b, 1e-5, max_coords, seed)};
}

}  // namespace detail

/// Central-difference gradient checks in double precision: every layer kind
/// behind a softmax head, a squared-error output, the classifier topology
/// at reduced width, and (when `full_size`) the classifier at its default
/// dimensions with sampled coordinates.
inline std::vector<GradCheckCase> grad_check_suite(std::uint64_t seed = 1, bool full_size = true) {
  using nn::LayerSpec;
  const Index d = 6, h = 8;
  auto head = [](Index in) {
    return std::vector<nn::HeadSpec>{{"out", {LayerSpec::affine(in, 4), LayerSpec::softmax(4)}}};
  };
  std::vector<GradCheckCase> out;
  auto single = [&](const std::string &name, std::vector<LayerSpec> trunk, Index width, int speakers = 0) {
    nn::NetworkSpec s{d, std::move(trunk), head(width)};
    s.validate();
    out.push_back(detail::run_grad_case(name, s, speakers, 8, 200, seed));
  };
  single("affine", {LayerSpec::affine(d, h)}, h);
  single("relu", {LayerSpec::affine(d, h), LayerSpec::relu(h)}, h);
  single("batchnorm", {LayerSpec::affine(d, h), LayerSpec::batch_norm(h)}, h);
  single("dropout", {LayerSpec::affine(d, h), LayerSpec::dropout(h, 0.3)}, h);
  single("bottleneck", {LayerSpec::affine(d, h), LayerSpec::bottleneck(h, 3), LayerSpec::affine(3, h)}, h);
  single("skip", {LayerSpec::affine(d, h), LayerSpec::relu(h), LayerSpec::affine(h, h), LayerSpec::skip(h, 0)}, h);
  single("lhuc", {LayerSpec::affine(d, h), LayerSpec::relu(h), LayerSpec::lhuc(h, "g")}, h, 3);
  single("softmax", {}, d);
  {
    nn::NetworkSpec s{d, {LayerSpec::affine(d, h), LayerSpec::relu(h), LayerSpec::affine(h, 3)}, {}};
    s.validate();
    out.push_back(detail::run_grad_case("squared-error", s, 0, 8, 200, seed));
  }

  ClassifierConfig small;
  small.hidden_dim = 16;
  small.projection_dim = 6;
  small.bottleneck_dim = 5;
  out.push_back(detail::run_grad_case("classifier", classifier_spec(12, 4, small), 0, 8, 200, seed));
  if (full_size) {
    const ClassifierConfig cfg;
    const Index in = input_dim(InputConfig::SBTB, SubspaceConfig{}, FrontEndConfig{}.num_channels);
    out.push_back(detail::run_grad_case("classifier-full", classifier_spec(in, 29, cfg), 0, 6, 6, seed));
  }
  return out;
}

}  // namespace stsb

#endif  // STSB_GRADCHECK_HPP
