// stsb/stsb.hpp

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


#ifndef STSB_STSB_HPP
#define STSB_STSB_HPP

#include "stsb/adapt.hpp"
#include "stsb/audio.hpp"
#include "stsb/classifier.hpp"
#include "stsb/config.hpp"
#include "stsb/error.hpp"
#include "stsb/gradcheck.hpp"
#include "stsb/manifest.hpp"
#include "stsb/neural/network.hpp"
#include "stsb/neural/spec.hpp"
#include "stsb/neural/train.hpp"
#include "stsb/pipeline.hpp"
#include "stsb/random.hpp"
#include "stsb/spectrogram.hpp"
#include "stsb/stbf.hpp"
#include "stsb/subspace.hpp"
#include "stsb/svd.hpp"
#include "stsb/synth.hpp"
#include "stsb/types.hpp"

#endif  // STSB_STSB_HPP
