/*
 * Copyright 2026 The jacfield Authors. All rights reserved.
 * This file is licensed to you under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License. You may obtain a copy
 * of the License at http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software distributed under
 * the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
 * OF ANY KIND, either express or implied. See the License for the specific language
 * governing permissions and limitations under the License.
 */

#pragma once

#include <jacfield/types.hpp>

#include <Eigen/Core>

#include <string_view>
#include <vector>

namespace jacfield {

/// Translation applied to frame i of the translate-line preset: a straight path from the
/// origin to (0.5, 0.25, 0) * diagonal, sampled uniformly over the frames.
std::vector<Eigen::Vector3d> translate_line_path(const Vertices& rest, int num_frames);

/// Rest pose translated along translate_line_path.
std::vector<Vertices> translate_line_targets(const Vertices& rest, int num_frames);

///
/// Travelling wave along x, displacing z. With s the normalized x coordinate in [0,1],
/// frame i moves a vertex by amplitude * s * sin(2 pi (cycles * s - i / L)), where the
/// amplitude is 0.08 of the bounding-box diagonal and cycles = 1. The edge at s = 0 is the pole.
///
std::vector<Vertices> flag_wave_targets(const Vertices& rest, int num_frames);

/// Targets for a named preset ("translate-line" or "flag-wave"); throws ValidationError otherwise.
std::vector<Vertices> preset_targets(std::string_view name, const Vertices& rest, int num_frames);

} // namespace jacfield
