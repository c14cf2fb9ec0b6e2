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

#include <jacfield/poisson.hpp>

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace jacfield {

/// Global rotation (axis * angle, radians) followed by a translation, about the world origin.
struct RigidMotion
{
    Eigen::Vector3d axis_angle = Eigen::Vector3d::Zero();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    bool operator==(const RigidMotion&) const = default;
};

struct MotionFrame
{
    JacobianField delta_j; // per-face offset from identity
    RigidMotion rigid;

    bool operator==(const MotionFrame&) const = default;
};

/// Dynamic parameters: one {delta Jacobian, rigid motion} per frame over a fixed static mesh.
struct MotionSequence
{
    std::vector<MotionFrame> frames;
    std::uint64_t static_mesh_ref = 0;

    /// L frames at rest: zero delta Jacobians and identity rigid motions.
    static MotionSequence at_rest(std::size_t num_frames, std::size_t num_faces, std::uint64_t mesh_ref);

    std::size_t size() const { return frames.size(); }
};

/// Rodrigues map. Falls back to a second-order series below kSmallAngle.
Eigen::Matrix3d rotation_exp(const Eigen::Vector3d& axis_angle);

/// Inverse of rotation_exp, returning an angle in [0, pi].
Eigen::Vector3d rotation_log(const Eigen::Matrix3d& rotation);

/// Right Jacobian Jr with d(R v)/d(omega) = -R [v]x Jr(omega).
Eigen::Matrix3d rotation_right_jacobian(const Eigen::Vector3d& axis_angle);

/// d(rotation_exp(omega) * v)/d(omega), a 3x3 matrix.
Eigen::Matrix3d rotate_point_jacobian(const Eigen::Vector3d& axis_angle, const Eigen::Vector3d& v);

/// Wrap omega so that |omega| <= pi while describing the same rotation.
Eigen::Vector3d canonicalize_axis_angle(const Eigen::Vector3d& axis_angle);

inline constexpr double kSmallAngle = 1e-6;

/// Frame geometry R(omega) * solve(I + delta_j) + t.
Vertices frame_vertices(const PoissonSystem& system, const MotionFrame& frame);

struct FrameGradient
{
    JacobianField delta_j;
    Eigen::Vector3d axis_angle = Eigen::Vector3d::Zero();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

/// Chain rule of frame_vertices. `solved` may pass the cached solve(I + delta_j) to skip a solve.
FrameGradient frame_vertices_adjoint(
    const PoissonSystem& system,
    const MotionFrame& frame,
    const Vertices& grad_vertices,
    const Vertices* solved = nullptr);

} // namespace jacfield
