// stsb/neural/spec.hpp

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

#ifndef STSB_NEURAL_SPEC_HPP
#define STSB_NEURAL_SPEC_HPP

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stsb/error.hpp"
#include "stsb/types.hpp"

namespace stsb::nn {

enum class LayerKind {
  Affine,
  ReLU,
  BatchNorm,
  Dropout,
  LinearBottleneckProjection,  // bias-free linear map to a narrower width
  SkipJunction,                // adds the output of an earlier trunk layer
  Softmax,
  LHUCScale,                   // per-speaker hidden unit amplitudes 2*sigmoid(r)
};

inline std::string_view to_string(LayerKind k) {
  switch (k) {
    case LayerKind::Affine: return "affine";
    case LayerKind::ReLU: return "relu";
    case LayerKind::BatchNorm: return "batchnorm";
    case LayerKind::Dropout: return "dropout";
    case LayerKind::LinearBottleneckProjection: return "bottleneck";
    case LayerKind::SkipJunction: return "skip";
    case LayerKind::Softmax: return "softmax";
    case LayerKind::LHUCScale: return "lhuc";
  }
  return "?";
}

inline LayerKind parse_layer_kind(std::string_view s) {
  for (auto k : {LayerKind::Affine, LayerKind::ReLU, LayerKind::BatchNorm, LayerKind::Dropout,
                 LayerKind::LinearBottleneckProjection, LayerKind::SkipJunction,
                 LayerKind::Softmax, LayerKind::LHUCScale})
    if (to_string(k) == s) return k;
  fail(ErrorKind::Format, "unknown layer kind '" + std::string(s) + "'");
}

struct LayerSpec {
  LayerKind kind = LayerKind::Affine;
  Index in_dim = 0;
  Index out_dim = 0;
  double dropout_rate = 0.0;
  int skip_source = -1;     // trunk layer index; -1 is the network input
  std::string lhuc_group;
  Index init_fan_in = 0;    // Affine init scale override; 0 uses in_dim

  static LayerSpec affine(Index in, Index out, Index init_fan_in = 0) {
    return {LayerKind::Affine, in, out, 0.0, -1, {}, init_fan_in};
  }
  static LayerSpec relu(Index d) { return {LayerKind::ReLU, d, d}; }
  static LayerSpec batch_norm(Index d) { return {LayerKind::BatchNorm, d, d}; }
  static LayerSpec dropout(Index d, double rate) { return {LayerKind::Dropout, d, d, rate}; }
  static LayerSpec bottleneck(Index in, Index width) {
    return {LayerKind::LinearBottleneckProjection, in, width};
  }
  static LayerSpec skip(Index d, int source) { return {LayerKind::SkipJunction, d, d, 0.0, source}; }
  static LayerSpec softmax(Index d) { return {LayerKind::Softmax, d, d}; }
  static LayerSpec lhuc(Index d, std::string group) {
    return {LayerKind::LHUCScale, d, d, 0.0, -1, std::move(group)};
  }
};

struct HeadSpec {
  std::string name;
  std::vector<LayerSpec> layers;

  bool is_softmax() const { return !layers.empty() && layers.back().kind == LayerKind::Softmax; }
};

/// A trunk of layers followed by zero or more heads that all read the
/// trunk's output. With no heads the trunk output is the network output.
struct NetworkSpec {
  Index input_dim = 0;
  std::vector<LayerSpec> trunk;
  std::vector<HeadSpec> heads;

  Index trunk_dim() const { return trunk.empty() ? input_dim : trunk.back().out_dim; }

  void validate() const {
    require(input_dim >= 1, ErrorKind::Config, "network input_dim must be >= 1");
    auto check = [](const LayerSpec &l, Index expected_in, const std::string &where) {
      require(l.in_dim == expected_in, ErrorKind::Shape,
              where + ": expects input " + std::to_string(l.in_dim) + " but receives " +
                  std::to_string(expected_in));
      require(l.out_dim >= 1, ErrorKind::Shape, where + ": out_dim must be >= 1");
      switch (l.kind) {
        case LayerKind::Affine: break;
        case LayerKind::LinearBottleneckProjection:
          require(l.out_dim < l.in_dim, ErrorKind::Config, where + ": bottleneck width must be < in_dim");
          break;
        case LayerKind::Dropout:
          require(l.dropout_rate >= 0.0 && l.dropout_rate < 1.0, ErrorKind::Config,
                  where + ": dropout rate must lie in [0, 1)");
          [[fallthrough]];
        default:
          require(l.out_dim == l.in_dim, ErrorKind::Shape, where + ": must preserve width");
      }
    };
    Index dim = input_dim;
    for (std::size_t i = 0; i < trunk.size(); ++i) {
      const auto &l = trunk[i];
      const std::string where = "trunk layer " + std::to_string(i) + " (" + std::string(to_string(l.kind)) + ")";
      check(l, dim, where);
      require(l.kind != LayerKind::Softmax || (heads.empty() && i + 1 == trunk.size()),
              ErrorKind::Config, where + ": softmax only allowed as the final layer");
      if (l.kind == LayerKind::SkipJunction) {
        require(l.skip_source >= -1 && l.skip_source < static_cast<int>(i), ErrorKind::Config,
                where + ": skip source must be an earlier trunk layer");
        const Index src_dim = l.skip_source < 0 ? input_dim : trunk[l.skip_source].out_dim;
        require(src_dim == l.in_dim, ErrorKind::Shape, where + ": skip source width mismatch");
      }
      dim = l.out_dim;
    }
    for (const auto &h : heads) {
      require(!h.layers.empty(), ErrorKind::Config, "head '" + h.name + "' has no layers");
      Index hd = dim;
      for (std::size_t i = 0; i < h.layers.size(); ++i) {
        const auto &l = h.layers[i];
        const std::string where = "head '" + h.name + "' layer " + std::to_string(i);
        check(l, hd, where);
        require(l.kind != LayerKind::SkipJunction, ErrorKind::Config, where + ": skip not allowed in heads");
        require(l.kind != LayerKind::Softmax || i + 1 == h.layers.size(), ErrorKind::Config,
                where + ": softmax only allowed as the final layer");
        hd = l.out_dim;
      }
    }
  }
};

inline nlohmann::json to_json(const LayerSpec &l) {
  nlohmann::json j = {{"kind", to_string(l.kind)}, {"in", l.in_dim}, {"out", l.out_dim}};
  if (l.kind == LayerKind::Dropout) j["rate"] = l.dropout_rate;
  if (l.kind == LayerKind::SkipJunction) j["source"] = l.skip_source;
  if (l.kind == LayerKind::LHUCScale) j["group"] = l.lhuc_group;
  if (l.init_fan_in != 0) j["init_fan_in"] = l.init_fan_in;
  return j;
}

inline LayerSpec layer_from_json(const nlohmann::json &j) {
  LayerSpec l;
  l.kind = parse_layer_kind(j.at("kind").get<std::string>());
  l.in_dim = j.at("in").get<Index>();
  l.out_dim = j.at("out").get<Index>();
  l.dropout_rate = j.value("rate", 0.0);
  l.skip_source = j.value("source", -1);
  l.lhuc_group = j.value("group", std::string{});
  l.init_fan_in = j.value("init_fan_in", Index{0});
  return l;
}

inline nlohmann::json to_json(const NetworkSpec &s) {
  nlohmann::json trunk = nlohmann::json::array(), heads = nlohmann::json::array();
  for (const auto &l : s.trunk) trunk.push_back(to_json(l));
  for (const auto &h : s.heads) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto &l : h.layers) layers.push_back(to_json(l));
    heads.push_back({{"name", h.name}, {"layers", layers}});
  }
  return {{"input_dim", s.input_dim}, {"trunk", trunk}, {"heads", heads}};
}

inline NetworkSpec spec_from_json(const nlohmann::json &j) {
  NetworkSpec s;
  s.input_dim = j.at("input_dim").get<Index>();
  for (const auto &l : j.at("trunk")) s.trunk.push_back(layer_from_json(l));
  for (const auto &h : j.at("heads")) {
    HeadSpec hs{h.at("name").get<std::string>(), {}};
    for (const auto &l : h.at("layers")) hs.layers.push_back(layer_from_json(l));
    s.heads.push_back(std::move(hs));
  }
  s.validate();
  return s;
}

}  // namespace stsb::nn

#endif  // STSB_NEURAL_SPEC_HPP
