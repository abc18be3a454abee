// stsb/types.hpp

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

#ifndef STSB_TYPES_HPP
#define STSB_TYPES_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "stsb/error.hpp"

namespace stsb {

using Index = Eigen::Index;
using MatrixXd = Eigen::MatrixXd;
using VectorXd = Eigen::VectorXd;
using RowVectorXd = Eigen::RowVectorXd;

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <class T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;

/// Intelligibility groups: four dysarthric severity bands plus control.
/// The numeric order is the class index used by the 5-way classifier head.
enum class Intelligibility : int { VL = 0, L = 1, M = 2, H = 3, CTL = 4 };

inline constexpr int kNumGroups = 5;
inline constexpr std::array<Intelligibility, 5> kAllGroups = {
    Intelligibility::VL, Intelligibility::L, Intelligibility::M,
    Intelligibility::H, Intelligibility::CTL};
inline constexpr std::array<Intelligibility, 4> kDysarthricGroups = {
    Intelligibility::VL, Intelligibility::L, Intelligibility::M,
    Intelligibility::H};

inline std::string_view to_string(Intelligibility g) {
  switch (g) {
    case Intelligibility::VL: return "VL";
    case Intelligibility::L: return "L";
    case Intelligibility::M: return "M";
    case Intelligibility::H: return "H";
    case Intelligibility::CTL: return "CTL";
  }
  return "?";
}

inline std::optional<Intelligibility> parse_intelligibility(std::string_view s) {
  for (auto g : kAllGroups)
    if (to_string(g) == s) return g;
  return std::nullopt;
}

inline bool is_dysarthric(Intelligibility g) { return g != Intelligibility::CTL; }

inline int group_index(Intelligibility g) { return static_cast<int>(g); }

inline Intelligibility group_from_index(int i) {
  require(i >= 0 && i < kNumGroups, ErrorKind::Parameter,
          "group index out of range: " + std::to_string(i));
  return static_cast<Intelligibility>(i);
}

struct UtteranceMeta {
  std::string speaker_id;
  std::string block_id;
  std::string word_id;
  Intelligibility intelligibility = Intelligibility::CTL;

  friend bool operator==(const UtteranceMeta &, const UtteranceMeta &) = default;
};

}  // namespace stsb

#endif  // STSB_TYPES_HPP
