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

#include <jacfield/motion.hpp>
#include <jacfield/operators.hpp>

#include <optional>
#include <span>
#include <vector>

namespace jacfield {

/// Value of one objective term plus whichever gradients it defines, one entry per frame.
struct EnergyResult
{
    double value = 0.0;
    std::vector<Vertices> grad_vertices;
    std::vector<JacobianField> grad_jacobians;
    std::vector<RigidMotion> grad_rigid;
};

///
/// Flexibility term: sum over frames and faces of exp(r) * r with r = ||J - I||_F.
/// `jacobians` are the full dynamic Jacobians (I + delta). The gradient at r = 0 is
/// taken as zero.
///
EnergyResult flex_energy(std::span<const JacobianField> jacobians);

/// Per-vertex rotation best aligning the rest one-ring to the deformed one-ring.
/// Vertices without neighbors get the identity and a warning.
std::vector<Eigen::Matrix3d> optimal_rotations(
    const Vertices& rest,
    const Vertices& deformed,
    const CotanWeights& weights);

///
/// As-rigid-as-possible energy of every frame against `rest`, summed over frames.
/// Rotations are refit per frame and held fixed for the gradient.
///
EnergyResult arap_energy(
    const Vertices& rest,
    std::span<const Vertices> deformed,
    const CotanWeights& weights);

/// Squared differences of consecutive frames' delta Jacobians, axis-angles and translations.
EnergyResult temporal_smoothness(const MotionSequence& sequence);

/// Sum of squared distances to `target` over `mask` (all vertices when empty).
EnergyResult target_fit_energy(
    const Vertices& vertices,
    const Vertices& target,
    std::span<const int> mask = {});

} // namespace jacfield
