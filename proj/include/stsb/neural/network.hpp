// stsb/neural/network.hpp

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

#ifndef STSB_NEURAL_NETWORK_HPP
#define STSB_NEURAL_NETWORK_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stsb/error.hpp"
#include "stsb/neural/spec.hpp"
#include "stsb/types.hpp"

namespace stsb::nn {

enum class Mode { Train, Eval };

inline constexpr double kBatchNormMomentum = 0.9;
inline constexpr double kBatchNormEpsilon = 1e-5;

template <class T>
struct Tensor {
  std::string name;
  Mat<T> value;
  Mat<T> grad;
  Mat<T> velocity;
  bool trainable = true;
  bool lhuc = false;
  bool decay = false;  // weight matrices only
};

/// LHUC amplitude 2*sigmoid(r), in (0, 2).
template <class T>
T lhuc_amplitude(T r) {
  return T(2) / (T(1) + std::exp(-r));
}

/// h scaled column-wise by 2*sigmoid(r).
template <class T>
Mat<T> lhuc_scale(const Mat<T> &h, const RowVec<T> &r) {
  require(r.size() == h.cols(), ErrorKind::Shape, "LHUC vector length must equal layer width");
  const RowVec<T> a = r.unaryExpr([](T v) { return lhuc_amplitude(v); });
  return (h.array().rowwise() * a.array()).matrix();
}

template <class T>
Mat<T> softmax_rows(const Mat<T> &z) {
  Mat<T> p = (z.colwise() - z.rowwise().maxCoeff()).array().exp().matrix();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

namespace detail {

inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t layer, std::uint64_t role) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(layer), static_cast<std::uint32_t>(role)};
  return std::mt19937_64(seq);
}

}  // namespace detail

/// Feed-forward network state: parameters, batchnorm statistics, dropout
/// masks and per-speaker LHUC tables. A single trainer mutates it; `predict`
/// is const and safe to call concurrently on a frozen network.
template <class T>
class Network {
  template <class U>
  friend class Network;

 public:
  struct Output {
    std::vector<Mat<T>> heads;  // one per head; empty when the spec has none
    Mat<T> trunk;
  };

  Network() = default;

  Network(NetworkSpec spec, std::uint64_t seed) : spec_(std::move(spec)), rng_(seed) {
    spec_.validate();
    build_layers();
    init_parameters(seed);
  }

  const NetworkSpec &spec() const { return spec_; }
  std::vector<Tensor<T>> &tensors() { return tensors_; }
  const std::vector<Tensor<T>> &tensors() const { return tensors_; }
  std::size_t num_layers() const { return layers_.size(); }
  bool has_lhuc() const {
    return std::any_of(layers_.begin(), layers_.end(),
                       [](const Layer &l) { return l.spec.kind == LayerKind::LHUCScale; });
  }

  // --- speakers (LHUC tables) -------------------------------------------

  const std::vector<std::string> &speakers() const { return speakers_; }

  std::optional<int> find_speaker(const std::string &id) const {
    auto it = std::find(speakers_.begin(), speakers_.end(), id);
    if (it == speakers_.end()) return std::nullopt;
    return static_cast<int>(it - speakers_.begin());
  }

  /// Returns the LHUC slot of `id`, appending a zero (identity) vector if new.
  int speaker_slot(const std::string &id) {
    if (auto s = find_speaker(id)) return *s;
    speakers_.push_back(id);
    for (auto &l : layers_) {
      if (l.table < 0) continue;
      auto &t = tensors_[l.table];
      for (Mat<T> *m : {&t.value, &t.grad, &t.velocity}) {
        m->conservativeResize(m->rows() + 1, Eigen::NoChange);
        m->row(m->rows() - 1).setZero();
      }
    }
    return static_cast<int>(speakers_.size()) - 1;
  }

  // --- switches ---------------------------------------------------------

  /// Reuse the current dropout masks in Train mode (finite-difference checks).
  void set_dropout_frozen(bool frozen) { dropout_frozen_ = frozen; }
  void set_update_running_stats(bool update) { update_running_ = update; }
  void reseed_dropout(std::uint64_t seed) { rng_.seed(seed); }

  void set_trainable(bool trainable) {
    for (auto &t : tensors_) t.trainable = trainable;
  }
  /// Freezes everything except the LHUC tables.
  void freeze_all_but_lhuc() {
    for (auto &t : tensors_) t.trainable = t.lhuc;
  }

  // --- passes -----------------------------------------------------------

  /// Forward pass; caches activations for `backward`. Train mode uses batch
  /// statistics and dropout, Eval mode running statistics and no dropout.
  Output forward(const Mat<T> &x, std::span<const int> speakers, Mode mode) {
    run(*this, x, speakers, mode, cache_);
    return collect(cache_);
  }
  Output forward(const Mat<T> &x, Mode mode) { return forward(x, {}, mode); }

  /// Eval-mode forward that leaves the network untouched.
  Output predict(const Mat<T> &x, std::span<const int> speakers = {}) const {
    Cache c;
    run(*this, x, speakers, Mode::Eval, c);
    return collect(c);
  }

  /// Back-propagates gradients of the loss with respect to each head's
  /// output (or the trunk output if there are no heads) and stores
  /// parameter gradients in `tensors()[i].grad`, replacing old values.
  /// With `through_softmax == false`, gradients for softmax heads are taken
  /// with respect to the softmax input instead.
  void backward(const std::vector<Mat<T>> &d_outputs, bool through_softmax = true) {
    require(!cache_.out.empty(), ErrorKind::Config, "backward called before forward");
    zero_grad();
    const std::size_t n_trunk = spec_.trunk.size();
    std::vector<Mat<T>> dout(layers_.size());
    auto accumulate = [&](int target, const Mat<T> &g) {
      if (target < 0) return;
      auto &slot = dout[static_cast<std::size_t>(target)];
      if (slot.size() == 0) slot = g;
      else slot += g;
    };

    auto seed_chain = [&](std::size_t last, const Mat<T> &g) -> std::pair<std::ptrdiff_t, Mat<T>> {
      if (!through_softmax && layers_[last].spec.kind == LayerKind::Softmax)
        return {static_cast<std::ptrdiff_t>(last) - 1, g};
      return {static_cast<std::ptrdiff_t>(last), g};
    };

    if (spec_.heads.empty()) {
      require(d_outputs.size() == 1, ErrorKind::Shape, "expected one output gradient");
      require(n_trunk > 0, ErrorKind::Config, "network has no layers");
      auto [start, g] = seed_chain(n_trunk - 1, d_outputs[0]);
      if (start >= 0) accumulate(static_cast<int>(start), g);
    } else {
      require(d_outputs.size() == spec_.heads.size(), ErrorKind::Shape,
              "expected one gradient per head");
      for (std::size_t h = 0; h < spec_.heads.size(); ++h) {
        const std::size_t first = head_begin_[h];
        const std::size_t last = first + spec_.heads[h].layers.size() - 1;
        auto [start, g] = seed_chain(last, d_outputs[h]);
        Mat<T> cur = std::move(g);
        for (std::ptrdiff_t l = start; l >= static_cast<std::ptrdiff_t>(first); --l)
          cur = backprop_layer(static_cast<std::size_t>(l), cur);
        accumulate(static_cast<int>(n_trunk) - 1, cur);
      }
    }
    for (std::ptrdiff_t l = static_cast<std::ptrdiff_t>(n_trunk) - 1; l >= 0; --l) {
      const auto li = static_cast<std::size_t>(l);
      if (dout[li].size() == 0) continue;
      const Layer &layer = layers_[li];
      if (layer.spec.kind == LayerKind::SkipJunction) accumulate(layer.spec.skip_source, dout[li]);
      Mat<T> dx = backprop_layer(li, dout[li]);
      accumulate(layer.source, dx);
      dout[li].resize(0, 0);
    }
  }

  void zero_grad() {
    for (auto &t : tensors_) t.grad.setZero();
  }

  // --- state export ------------------------------------------------------

  /// Every tensor needed to restore the network: parameters, LHUC tables and
  /// batchnorm running statistics, in a fixed order.
  std::vector<std::pair<std::string, Mat<T>>> named_state() const {
    std::vector<std::pair<std::string, Mat<T>>> out;
    for (const auto &t : tensors_) out.emplace_back(t.name, t.value);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      if (layers_[l].spec.kind != LayerKind::BatchNorm) continue;
      out.emplace_back(layer_name(l) + ".running_mean", layers_[l].running_mean);
      out.emplace_back(layer_name(l) + ".running_var", layers_[l].running_var);
    }
    return out;
  }

  void load_named_state(const std::vector<std::pair<std::string, Mat<T>>> &state,
                        std::vector<std::string> speakers) {
    speakers_.clear();
    for (const auto &l : layers_)
      if (l.table >= 0)
        for (Mat<T> *m : {&tensors_[l.table].value, &tensors_[l.table].grad, &tensors_[l.table].velocity})
          m->resize(0, l.spec.out_dim);
    for (const auto &s : speakers) speaker_slot(s);
    std::map<std::string, const Mat<T> *> by_name;
    for (const auto &[n, m] : state) by_name[n] = &m;
    auto fetch = [&](const std::string &name, Index rows, Index cols) -> const Mat<T> & {
      auto it = by_name.find(name);
      require(it != by_name.end(), ErrorKind::Format, "checkpoint lacks tensor " + name);
      require(it->second->rows() == rows && it->second->cols() == cols, ErrorKind::Shape,
              "checkpoint tensor " + name + " has wrong shape");
      return *it->second;
    };
    for (auto &t : tensors_) t.value = fetch(t.name, t.value.rows(), t.value.cols());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      auto &layer = layers_[l];
      if (layer.spec.kind != LayerKind::BatchNorm) continue;
      layer.running_mean = fetch(layer_name(l) + ".running_mean", 1, layer.spec.out_dim);
      layer.running_var = fetch(layer_name(l) + ".running_var", 1, layer.spec.out_dim);
      require((layer.running_var.array() > T(0)).all(), ErrorKind::Format,
              "batchnorm running variance must be positive");
    }
  }

  /// Same network in another scalar type (e.g. float-trained, double-checked).
  template <class U>
  Network<U> cast() const {
    Network<U> n;
    n.spec_ = spec_;
    n.head_begin_ = head_begin_;
    n.speakers_ = speakers_;
    n.rng_ = rng_;
    n.dropout_frozen_ = dropout_frozen_;
    n.update_running_ = update_running_;
    for (const auto &l : layers_) {
      typename Network<U>::Layer m;
      m.spec = l.spec;
      m.source = l.source;
      m.weight = l.weight;
      m.bias = l.bias;
      m.gamma = l.gamma;
      m.beta = l.beta;
      m.table = l.table;
      m.running_mean = l.running_mean.template cast<U>();
      m.running_var = l.running_var.template cast<U>();
      m.mask = l.mask.template cast<U>();
      n.layers_.push_back(std::move(m));
    }
    for (const auto &t : tensors_)
      n.tensors_.push_back({t.name, t.value.template cast<U>(), t.grad.template cast<U>(),
                            t.velocity.template cast<U>(), t.trainable, t.lhuc, t.decay});
    return n;
  }

 private:
  struct Layer {
    LayerSpec spec;
    int source = -1;  // layer whose output feeds this one; -1 is the network input
    int weight = -1, bias = -1, gamma = -1, beta = -1, table = -1;
    RowVec<T> running_mean, running_var;
    Mat<T> mask;
  };

  struct Cache {
    Mat<T> input;
    std::vector<Mat<T>> out;
    std::vector<Mat<T>> aux;         // batchnorm x-hat, LHUC amplitudes
    std::vector<RowVec<T>> inv_std;  // batchnorm
    std::vector<int> speakers;
    Mode mode = Mode::Eval;
  };

  std::string layer_name(std::size_t l) const {
    return "L" + std::to_string(l) + "." + std::string(to_string(layers_[l].spec.kind));
  }

  void build_layers() {
    layers_.clear();
    head_begin_.clear();
    for (std::size_t i = 0; i < spec_.trunk.size(); ++i)
      layers_.push_back({spec_.trunk[i], static_cast<int>(i) - 1});
    const int trunk_out = static_cast<int>(spec_.trunk.size()) - 1;
    for (const auto &h : spec_.heads) {
      head_begin_.push_back(layers_.size());
      for (std::size_t i = 0; i < h.layers.size(); ++i)
        layers_.push_back({h.layers[i], i == 0 ? trunk_out : static_cast<int>(layers_.size()) - 1});
    }
  }

  int add_tensor(std::string name, Mat<T> value, bool lhuc, bool decay) {
    Tensor<T> t{std::move(name), std::move(value), {}, {}, true, lhuc, decay};
    t.grad = Mat<T>::Zero(t.value.rows(), t.value.cols());
    t.velocity = Mat<T>::Zero(t.value.rows(), t.value.cols());
    tensors_.push_back(std::move(t));
    return static_cast<int>(tensors_.size()) - 1;
  }

  // Each weight layer draws from its own stream keyed by its ordinal among
  // weight layers, and rows are filled in input order. Inserting
  // parameter-free or LHUC layers, or appending input features, therefore
  // leaves the existing initial weights unchanged.
  void init_parameters(std::uint64_t seed) {
    std::uint64_t ordinal = 0;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      auto &layer = layers_[l];
      const auto &s = layer.spec;
      const std::string name = layer_name(l);
      switch (s.kind) {
        case LayerKind::Affine:
        case LayerKind::LinearBottleneckProjection: {
          const Index fan_in = s.init_fan_in > 0 ? s.init_fan_in : s.in_dim;
          const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
          std::uniform_real_distribution<double> u(-bound, bound);
          auto wrng = detail::stream(seed, ordinal, 0);
          Mat<T> w(s.in_dim, s.out_dim);
          for (Index i = 0; i < s.in_dim; ++i)
            for (Index j = 0; j < s.out_dim; ++j) w(i, j) = static_cast<T>(u(wrng));
          layer.weight = add_tensor(name + ".W", std::move(w), false, true);
          if (s.kind == LayerKind::Affine) {
            auto brng = detail::stream(seed, ordinal, 1);
            Mat<T> b(1, s.out_dim);
            for (Index j = 0; j < s.out_dim; ++j) b(0, j) = static_cast<T>(u(brng));
            layer.bias = add_tensor(name + ".b", std::move(b), false, false);
          }
          ++ordinal;
          break;
        }
        case LayerKind::BatchNorm:
          layer.gamma = add_tensor(name + ".gamma", Mat<T>::Ones(1, s.out_dim), false, false);
          layer.beta = add_tensor(name + ".beta", Mat<T>::Zero(1, s.out_dim), false, false);
          layer.running_mean = RowVec<T>::Zero(s.out_dim);
          layer.running_var = RowVec<T>::Ones(s.out_dim);
          break;
        case LayerKind::LHUCScale:
          layer.table = add_tensor(name + ".r", Mat<T>::Zero(0, s.out_dim), true, false);
          break;
        default:
          break;
      }
    }
  }

  Output collect(const Cache &c) const {
    Output o;
    const std::size_t n_trunk = spec_.trunk.size();
    o.trunk = n_trunk == 0 ? c.input : c.out[n_trunk - 1];
    for (std::size_t h = 0; h < spec_.heads.size(); ++h)
      o.heads.push_back(c.out[head_begin_[h] + spec_.heads[h].layers.size() - 1]);
    return o;
  }

  template <class Self>
  static void run(Self &self, const Mat<T> &x, std::span<const int> speakers, Mode mode, Cache &c) {
    constexpr bool mutating = !std::is_const_v<Self>;
    if constexpr (!mutating)
      require(mode == Mode::Eval, ErrorKind::Config, "const forward must run in Eval mode");
    require(x.cols() == self.spec_.input_dim, ErrorKind::Shape,
            "input has " + std::to_string(x.cols()) + " columns, network expects " +
                std::to_string(self.spec_.input_dim));
    const Index rows = x.rows();
    if (self.has_lhuc()) {
      require(static_cast<Index>(speakers.size()) == rows, ErrorKind::Shape,
              "LHUC network needs one speaker slot per row");
      for (int s : speakers)
        require(s >= 0 && s < static_cast<int>(self.speakers_.size()), ErrorKind::Data,
                "unknown LHUC speaker slot " + std::to_string(s));
    }
    const std::size_t n = self.layers_.size();
    c.input = x;
    c.out.assign(n, Mat<T>());
    c.aux.assign(n, Mat<T>());
    c.inv_std.assign(n, RowVec<T>());
    c.speakers.assign(speakers.begin(), speakers.end());
    c.mode = mode;

    for (std::size_t l = 0; l < n; ++l) {
      auto &layer = self.layers_[l];
      const Mat<T> &in = layer.source < 0 ? c.input : c.out[static_cast<std::size_t>(layer.source)];
      Mat<T> &out = c.out[l];
      switch (layer.spec.kind) {
        case LayerKind::Affine:
          out.noalias() = in * self.tensors_[layer.weight].value;
          out.rowwise() += RowVec<T>(self.tensors_[layer.bias].value);
          break;
        case LayerKind::LinearBottleneckProjection:
          out.noalias() = in * self.tensors_[layer.weight].value;
          break;
        case LayerKind::ReLU:
          out = in.cwiseMax(T(0));
          break;
        case LayerKind::BatchNorm: {
          const RowVec<T> gamma = self.tensors_[layer.gamma].value;
          const RowVec<T> beta = self.tensors_[layer.beta].value;
          RowVec<T> mean, var;
          if (mode == Mode::Train) {
            mean = in.colwise().mean();
            var = (in.rowwise() - mean).array().square().colwise().mean();
            if constexpr (mutating) {
              if (self.update_running_) {
                const T m = static_cast<T>(kBatchNormMomentum);
                layer.running_mean = m * layer.running_mean + (T(1) - m) * mean;
                layer.running_var = m * layer.running_var + (T(1) - m) * var;
              }
            }
          } else {
            mean = layer.running_mean;
            var = layer.running_var;
          }
          c.inv_std[l] = (var.array() + static_cast<T>(kBatchNormEpsilon)).rsqrt();
          c.aux[l] = ((in.rowwise() - mean).array().rowwise() * c.inv_std[l].array()).matrix();
          out = ((c.aux[l].array().rowwise() * gamma.array()).rowwise() + beta.array()).matrix();
          break;
        }
        case LayerKind::Dropout:
          if (mode == Mode::Train && layer.spec.dropout_rate > 0.0) {
            if constexpr (mutating) {
              const bool reuse = self.dropout_frozen_ && layer.mask.rows() == in.rows() &&
                                 layer.mask.cols() == in.cols();
              if (!reuse) {
                std::bernoulli_distribution keep(1.0 - layer.spec.dropout_rate);
                const T scale = static_cast<T>(1.0 / (1.0 - layer.spec.dropout_rate));
                layer.mask.resize(in.rows(), in.cols());
                for (Index j = 0; j < in.cols(); ++j)
                  for (Index i = 0; i < in.rows(); ++i)
                    layer.mask(i, j) = keep(self.rng_) ? scale : T(0);
              }
              out = in.cwiseProduct(layer.mask);
            }
          } else {
            out = in;
          }
          break;
        case LayerKind::SkipJunction: {
          const int src = layer.spec.skip_source;
          out = in + (src < 0 ? c.input : c.out[static_cast<std::size_t>(src)]);
          break;
        }
        case LayerKind::Softmax:
          out = softmax_rows(in);
          break;
        case LayerKind::LHUCScale: {
          const auto &table = self.tensors_[layer.table].value;
          Mat<T> amp(rows, in.cols());
          for (Index i = 0; i < rows; ++i)
            amp.row(i) = table.row(speakers[static_cast<std::size_t>(i)])
                             .unaryExpr([](T v) { return lhuc_amplitude(v); });
          out = in.cwiseProduct(amp);
          c.aux[l] = std::move(amp);
          break;
        }
      }
    }
    for (const auto &o : self.collect(c).heads)
      require(o.allFinite(), ErrorKind::Numeric, "non-finite network output");
    if (self.spec_.heads.empty())
      require(self.collect(c).trunk.allFinite(), ErrorKind::Numeric, "non-finite network output");
  }

  Mat<T> backprop_layer(std::size_t l, const Mat<T> &dy) {
    Layer &layer = layers_[l];
    const Mat<T> &in = layer.source < 0 ? cache_.input : cache_.out[static_cast<std::size_t>(layer.source)];
    switch (layer.spec.kind) {
      case LayerKind::Affine: {
        auto &w = tensors_[layer.weight];
        w.grad.noalias() += in.transpose() * dy;
        tensors_[layer.bias].grad += dy.colwise().sum();
        return dy * w.value.transpose();
      }
      case LayerKind::LinearBottleneckProjection: {
        auto &w = tensors_[layer.weight];
        w.grad.noalias() += in.transpose() * dy;
        return dy * w.value.transpose();
      }
      case LayerKind::ReLU:
        return dy.cwiseProduct((in.array() > T(0)).template cast<T>().matrix());
      case LayerKind::BatchNorm: {
        const Mat<T> &xhat = cache_.aux[l];
        const RowVec<T> gamma = tensors_[layer.gamma].value;
        tensors_[layer.gamma].grad += dy.cwiseProduct(xhat).colwise().sum();
        tensors_[layer.beta].grad += dy.colwise().sum();
        const Mat<T> dxhat = (dy.array().rowwise() * gamma.array()).matrix();
        if (cache_.mode == Mode::Eval)
          return (dxhat.array().rowwise() * cache_.inv_std[l].array()).matrix();
        const T b = static_cast<T>(dy.rows());
        const RowVec<T> sum_d = dxhat.colwise().sum();
        const RowVec<T> sum_dx = dxhat.cwiseProduct(xhat).colwise().sum();
        Mat<T> dx = (b * dxhat.array()).matrix();
        dx.rowwise() -= sum_d;
        dx -= (xhat.array().rowwise() * sum_dx.array()).matrix();
        return ((dx.array().rowwise() * cache_.inv_std[l].array()) / b).matrix();
      }
      case LayerKind::Dropout:
        if (cache_.mode == Mode::Train && layer.spec.dropout_rate > 0.0) return dy.cwiseProduct(layer.mask);
        return dy;
      case LayerKind::SkipJunction:
        return dy;
      case LayerKind::Softmax: {
        const Mat<T> &p = cache_.out[l];
        const Vec<T> dot = dy.cwiseProduct(p).rowwise().sum();
        return p.cwiseProduct(dy.colwise() - dot);
      }
      case LayerKind::LHUCScale: {
        const Mat<T> &amp = cache_.aux[l];
        auto &table = tensors_[layer.table];
        const Mat<T> dr = dy.cwiseProduct(in).cwiseProduct(
            amp.cwiseProduct((T(1) - amp.array() / T(2)).matrix()));
        for (Index i = 0; i < dy.rows(); ++i) table.grad.row(cache_.speakers[static_cast<std::size_t>(i)]) += dr.row(i);
        return dy.cwiseProduct(amp);
      }
    }
    return dy;
  }

  NetworkSpec spec_;
  std::vector<Layer> layers_;
  std::vector<std::size_t> head_begin_;
  std::vector<Tensor<T>> tensors_;
  std::vector<std::string> speakers_;
  std::mt19937_64 rng_;
  bool dropout_frozen_ = false;
  bool update_running_ = true;
  Cache cache_;
};

}  // namespace stsb::nn

#endif  // STSB_NEURAL_NETWORK_HPP
