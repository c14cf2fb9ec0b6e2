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

#include <jacfield/error.hpp>
#include <jacfield/motion.hpp>

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

namespace jacfield {

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& w)
{
    Eigen::Matrix3d k;
    k << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
    return k;
}

} // namespace

MotionSequence MotionSequence::at_rest(std::size_t num_frames, std::size_t num_faces, std::uint64_t mesh_ref)
{
    MotionSequence seq;
    seq.static_mesh_ref = mesh_ref;
    seq.frames.assign(num_frames, MotionFrame{JacobianField::zeros(num_faces), RigidMotion{}});
    return seq;
}

Eigen::Matrix3d rotation_exp(const Eigen::Vector3d& axis_angle)
{
    const double theta2 = axis_angle.squaredNorm();
    const double theta = std::sqrt(theta2);
    double a; // sin(t)/t
    double b; // (1 - cos(t))/t^2
    if (theta < kSmallAngle) {
        a = 1.0 - theta2 / 6.0;
        b = 0.5 - theta2 / 24.0;
    } else {
        a = std::sin(theta) / theta;
        b = (1.0 - std::cos(theta)) / theta2;
    }
    const Eigen::Matrix3d k = skew(axis_angle);
    Eigen::Matrix3d r = Eigen::Matrix3d::Identity() + a * k + b * k * k;
    // One Newton step toward the nearest orthogonal matrix.
    r = 0.5 * r * (3.0 * Eigen::Matrix3d::Identity() - r.transpose() * r);
    return r;
}

Eigen::Vector3d rotation_log(const Eigen::Matrix3d& rotation)
{
    const Eigen::AngleAxisd aa(rotation);
    return aa.axis() * aa.angle();
}

Eigen::Matrix3d rotation_right_jacobian(const Eigen::Vector3d& axis_angle)
{
    const double theta2 = axis_angle.squaredNorm();
    const double theta = std::sqrt(theta2);
    double b; // (1 - cos t)/t^2
    double c; // (t - sin t)/t^3
    if (theta < kSmallAngle) {
        b = 0.5 - theta2 / 24.0;
        c = 1.0 / 6.0 - theta2 / 120.0;
    } else {
        b = (1.0 - std::cos(theta)) / theta2;
        c = (theta - std::sin(theta)) / (theta2 * theta);
    }
    const Eigen::Matrix3d k = skew(axis_angle);
    return Eigen::Matrix3d::Identity() - b * k + c * k * k;
}

Eigen::Matrix3d rotate_point_jacobian(const Eigen::Vector3d& axis_angle, const Eigen::Vector3d& v)
{
    return -rotation_exp(axis_angle) * skew(v) * rotation_right_jacobian(axis_angle);
}

Eigen::Vector3d canonicalize_axis_angle(const Eigen::Vector3d& axis_angle)
{
    constexpr double pi = std::numbers::pi;
    const double theta = axis_angle.norm();
    if (theta <= pi) return axis_angle;
    double wrapped = std::fmod(theta, 2.0 * pi);
    if (wrapped > pi) wrapped -= 2.0 * pi;
    return axis_angle * (wrapped / theta);
}

Vertices frame_vertices(const PoissonSystem& system, const MotionFrame& frame)
{
    const Vertices solved = system.solve_from_rest(frame.delta_j);
    const Eigen::Matrix3d r = rotation_exp(frame.rigid.axis_angle);
    Vertices out = solved * r.transpose();
    out.rowwise() += frame.rigid.translation.transpose();
    return out;
}

FrameGradient frame_vertices_adjoint(
    const PoissonSystem& system,
    const MotionFrame& frame,
    const Vertices& grad_vertices,
    const Vertices* solved)
{
    if (grad_vertices.rows() != system.num_vertices()) {
        throw ValidationError("frame_vertices_adjoint: gradient row count does not match the mesh");
    }
    Vertices local;
    if (!solved) {
        local = system.solve_from_rest(frame.delta_j);
        solved = &local;
    }
    const Eigen::Matrix3d r = rotation_exp(frame.rigid.axis_angle);
    // Rows of grad_vertices * R are R^T g per vertex.
    const Vertices pulled = grad_vertices * r;

    FrameGradient out;
    out.translation = grad_vertices.colwise().sum().transpose();
    Eigen::Vector3d torque = Eigen::Vector3d::Zero();
    for (Eigen::Index a = 0; a < pulled.rows(); ++a) {
        torque += solved->row(a).transpose().cross(pulled.row(a).transpose());
    }
    out.axis_angle = rotation_right_jacobian(frame.rigid.axis_angle).transpose() * torque;
    out.delta_j = system.solve_adjoint(pulled);
    return out;
}

} // namespace jacfield
