// stsb/neural/train.hpp

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

#ifndef STSB_NEURAL_TRAIN_HPP
#define STSB_NEURAL_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "stsb/error.hpp"
#include "stsb/neural/network.hpp"
#include "stsb/types.hpp"

namespace stsb::nn {

inline constexpr double kLogFloor = 1e-12;

/// Minibatch for multi-task training. Softmax heads read `labels[h]`
/// (class indices); other heads read `targets[h]` and use squared error.
template <class T>
struct Batch {
  Mat<T> inputs;
  std::vector<std::vector<int>> labels;
  std::vector<Mat<T>> targets;
  std::vector<double> weights;  // per head, non-negative, summing to 1
  std::vector<int> speakers;    // LHUC slots, one per row when needed

  Index size() const { return inputs.rows(); }
};

/// Mean negative log-probability of the labelled class, floored at 1e-12.
template <class T>
double cross_entropy(const Mat<T> &probs, const std::vector<int> &labels) {
  require(static_cast<Index>(labels.size()) == probs.rows(), ErrorKind::Shape,
          "label count must equal batch size");
  double loss = 0.0;
  for (Index i = 0; i < probs.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    require(y >= 0 && y < probs.cols(), ErrorKind::Data, "class index out of range");
    loss -= std::log(std::max<double>(probs(i, y), kLogFloor));
  }
  return loss / static_cast<double>(probs.rows());
}

struct LossResult {
  double total = 0.0;
  std::vector<double> per_head;
};

template <class T>
void validate_batch(const Network<T> &net, const Batch<T> &batch) {
  const auto &heads = net.spec().heads;
  const std::size_t nh = std::max<std::size_t>(heads.size(), 1);
  require(batch.weights.size() == nh, ErrorKind::Shape, "need one task weight per head");
  double wsum = 0.0;
  for (double w : batch.weights) {
    require(w >= 0.0, ErrorKind::Parameter, "task weights must be non-negative");
    wsum += w;
  }
  require(std::abs(wsum - 1.0) < 1e-9, ErrorKind::Parameter, "task weights must sum to 1");
}

/// Weighted sum of per-head losses. When `backprop` is set the gradients of
/// the total loss are left in the network's tensors.
template <class T>
LossResult mtl_loss(Network<T> &net, const Batch<T> &batch, Mode mode, bool backprop = true) {
  validate_batch(net, batch);
  const auto out = net.forward(batch.inputs, batch.speakers, mode);
  const auto &heads = net.spec().heads;
  const std::vector<Mat<T>> outputs = heads.empty() ? std::vector<Mat<T>>{out.trunk} : out.heads;
  const bool softmax_trunk = heads.empty() && !net.spec().trunk.empty() &&
                             net.spec().trunk.back().kind == LayerKind::Softmax;
  const double b = static_cast<double>(batch.size());

  LossResult r;
  std::vector<Mat<T>> grads(outputs.size());
  for (std::size_t h = 0; h < outputs.size(); ++h) {
    const bool softmax = heads.empty() ? softmax_trunk : heads[h].is_softmax();
    const double w = batch.weights[h];
    const Mat<T> &o = outputs[h];
    double loss = 0.0;
    if (softmax) {
      require(h < batch.labels.size(), ErrorKind::Shape, "missing labels for head " + std::to_string(h));
      const auto &y = batch.labels[h];
      loss = cross_entropy(o, y);
      // d/dz of -log softmax(z)_y is p - onehot(y)
      grads[h] = o;
      for (Index i = 0; i < o.rows(); ++i) grads[h](i, y[static_cast<std::size_t>(i)]) -= T(1);
    } else {
      require(h < batch.targets.size() && batch.targets[h].rows() == o.rows() &&
                  batch.targets[h].cols() == o.cols(),
              ErrorKind::Shape, "missing or misshapen regression targets for head " + std::to_string(h));
      const Mat<T> diff = o - batch.targets[h];
      loss = 0.5 * static_cast<double>(diff.squaredNorm()) / b;
      grads[h] = diff;
    }
    grads[h] *= static_cast<T>(w / b);
    r.per_head.push_back(loss);
    r.total += w * loss;
  }
  if (backprop) net.backward(grads, /*through_softmax=*/false);
  return r;
}

struct SgdOptions {
  double learning_rate = 0.01;
  double momentum = 0.9;
  double l2 = 0.0;
};

/// Classical momentum: v <- momentum*v - lr*(g + l2*w); w <- w + v.
/// Frozen tensors (trainable == false) are left untouched.
template <class T>
void sgd_step(Network<T> &net, const SgdOptions &opt) {
  require(opt.learning_rate >= 0.0, ErrorKind::Parameter, "learning rate must be >= 0");
  require(opt.momentum >= 0.0 && opt.momentum < 1.0, ErrorKind::Parameter, "momentum must lie in [0, 1)");
  const T lr = static_cast<T>(opt.learning_rate);
  const T mom = static_cast<T>(opt.momentum);
  const T l2 = static_cast<T>(opt.l2);
  for (auto &t : net.tensors()) {
    if (!t.trainable) continue;
    if (t.decay && opt.l2 > 0.0)
      t.velocity = mom * t.velocity - lr * (t.grad + l2 * t.value);
    else
      t.velocity = mom * t.velocity - lr * t.grad;
    t.value += t.velocity;
  }
}

struct GradCheckEntry {
  std::string tensor;
  std::size_t coords_checked = 0;
  double max_rel_error = 0.0;
  double abs_error_at_max = 0.0;  // |analytic - numeric| at the worst coordinate
  double grad_at_max = 0.0;       // analytic gradient there
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::vector<GradCheckEntry> entries;
};

/// |a - n| / max(|a|, |n|, floor). The floor keeps coordinates whose true
/// gradient is zero from turning rounding noise into a large ratio.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Central-difference check of every trainable tensor (at most
/// `max_coords` sampled coordinates each). Runs in Train mode with dropout
/// masks frozen after the first pass and running statistics untouched.
inline GradCheckReport grad_check(Network<double> &net, const Batch<double> &batch, double eps = 1e-5,
                                  std::size_t max_coords = 50, std::uint64_t seed = 0) {
  require(batch.size() >= 1, ErrorKind::Parameter, "empty batch");
  net.set_update_running_stats(false);
  net.set_dropout_frozen(false);
  mtl_loss(net, batch, Mode::Train, true);  // draws the masks
  net.set_dropout_frozen(true);
  mtl_loss(net, batch, Mode::Train, true);

  std::vector<Mat<double>> analytic;
  for (const auto &t : net.tensors()) analytic.push_back(t.grad);

  std::mt19937_64 rng(seed);
  GradCheckReport report;
  for (std::size_t ti = 0; ti < net.tensors().size(); ++ti) {
    auto &t = net.tensors()[ti];
    if (!t.trainable || t.value.size() == 0) continue;
    const auto n = static_cast<std::size_t>(t.value.size());
    std::vector<std::size_t> coords(n);
    for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    if (n > max_coords) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(max_coords);
      std::sort(coords.begin(), coords.end());
    }
    GradCheckEntry e{t.name, coords.size()};
    for (std::size_t c : coords) {
      double &v = net.tensors()[ti].value.data()[c];
      const double saved = v;
      v = saved + eps;
      const double plus = mtl_loss(net, batch, Mode::Train, false).total;
      v = saved - eps;
      const double minus = mtl_loss(net, batch, Mode::Train, false).total;
      v = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double a = analytic[ti].data()[c];
      const double r = relative_error(a, numeric);
      if (r > e.max_rel_error) {
        e.max_rel_error = r;
        e.abs_error_at_max = std::abs(a - numeric);
        e.grad_at_max = a;
      }
    }
    report.max_rel_error = std::max(report.max_rel_error, e.max_rel_error);
    report.entries.push_back(std::move(e));
  }
  net.set_dropout_frozen(false);
  net.set_update_running_stats(true);
  return report;
}

}  // namespace stsb::nn

#endif  // STSB_NEURAL_TRAIN_HPP
