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

#include <jacfield/energies.hpp>
#include <jacfield/error.hpp>
#include <jacfield/log.hpp>

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>

namespace jacfield {

EnergyResult flex_energy(std::span<const JacobianField> jacobians)
{
    EnergyResult out;
    out.grad_jacobians.reserve(jacobians.size());
    for (const auto& field : jacobians) {
        JacobianField grad(field.size());
        for (std::size_t f = 0; f < field.size(); ++f) {
            const Eigen::Matrix3d d = field[f] - Eigen::Matrix3d::Identity();
            const double r = d.norm();
            const double e = std::exp(r);
            out.value += e * r;
            if (r > 0.0) grad[f] = (e * (1.0 + r) / r) * d;
        }
        out.grad_jacobians.push_back(std::move(grad));
    }
    return out;
}

std::vector<Eigen::Matrix3d> optimal_rotations(
    const Vertices& rest,
    const Vertices& deformed,
    const CotanWeights& weights)
{
    if (rest.rows() != deformed.rows() || rest.rows() != weights.num_vertices()) {
        throw ValidationError("optimal_rotations: vertex count mismatch");
    }
    std::vector<Eigen::Matrix3d> rotations(static_cast<std::size_t>(rest.rows()), Eigen::Matrix3d::Identity());
    for (int j = 0; j < rest.rows(); ++j) {
        const auto& ring = weights.neighbors(j);
        if (ring.empty()) {
            warn("vertex " + std::to_string(j) + " has an empty one-ring; using identity rotation");
            continue;
        }
        bool undeformed = true;
        for (const auto& [k, w] : ring) {
            undeformed = undeformed && (rest.row(j) - rest.row(k)) == (deformed.row(j) - deformed.row(k));
        }
        if (undeformed) continue;
        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        for (const auto& [k, w] : ring) {
            const Eigen::Vector3d es = (rest.row(j) - rest.row(k)).transpose();
            const Eigen::Vector3d ed = (deformed.row(j) - deformed.row(k)).transpose();
            cov += w * es * ed.transpose();
        }
        const Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Eigen::Matrix3d u = svd.matrixU();
        Eigen::Matrix3d r = svd.matrixV() * u.transpose();
        if (r.determinant() < 0.0) {
            u.col(2) *= -1.0;
            r = svd.matrixV() * u.transpose();
        }
        rotations[static_cast<std::size_t>(j)] = r;
    }
    return rotations;
}

EnergyResult arap_energy(const Vertices& rest, std::span<const Vertices> deformed, const CotanWeights& weights)
{
    EnergyResult out;
    out.grad_vertices.reserve(deformed.size());
    for (const auto& frame : deformed) {
        const auto rotations = optimal_rotations(rest, frame, weights);
        Vertices grad = Vertices::Zero(frame.rows(), 3);
        for (int j = 0; j < rest.rows(); ++j) {
            const Eigen::Matrix3d& r = rotations[static_cast<std::size_t>(j)];
            for (const auto& [k, w] : weights.neighbors(j)) {
                const Eigen::RowVector3d es = rest.row(j) - rest.row(k);
                const Eigen::RowVector3d e = (frame.row(j) - frame.row(k)) - es * r.transpose();
                out.value += w * e.squaredNorm();
                grad.row(j) += 2.0 * w * e;
                grad.row(k) -= 2.0 * w * e;
            }
        }
        out.grad_vertices.push_back(std::move(grad));
    }
    return out;
}

EnergyResult temporal_smoothness(const MotionSequence& sequence)
{
    EnergyResult out;
    const auto& frames = sequence.frames;
    const std::size_t num_frames = frames.size();
    const std::size_t num_faces = num_frames ? frames.front().delta_j.size() : 0;
    out.grad_jacobians.assign(num_frames, JacobianField::zeros(num_faces));
    out.grad_rigid.assign(num_frames, RigidMotion{});
    if (num_frames < 2) return out;

    for (std::size_t i = 0; i + 1 < num_frames; ++i) {
        const auto& a = frames[i];
        const auto& b = frames[i + 1];
        if (a.delta_j.size() != b.delta_j.size()) throw ValidationError("temporal_smoothness: frame face counts differ");
        for (std::size_t f = 0; f < num_faces; ++f) {
            const Eigen::Matrix3d d = b.delta_j[f] - a.delta_j[f];
            out.value += d.squaredNorm();
            out.grad_jacobians[i + 1][f] += 2.0 * d;
            out.grad_jacobians[i][f] -= 2.0 * d;
        }
        const Eigen::Vector3d dw = b.rigid.axis_angle - a.rigid.axis_angle;
        const Eigen::Vector3d dt = b.rigid.translation - a.rigid.translation;
        out.value += dw.squaredNorm() + dt.squaredNorm();
        out.grad_rigid[i + 1].axis_angle += 2.0 * dw;
        out.grad_rigid[i].axis_angle -= 2.0 * dw;
        out.grad_rigid[i + 1].translation += 2.0 * dt;
        out.grad_rigid[i].translation -= 2.0 * dt;
    }
    return out;
}

EnergyResult target_fit_energy(const Vertices& vertices, const Vertices& target, std::span<const int> mask)
{
    if (vertices.rows() != target.rows()) {
        throw ValidationError("target_fit_energy: target has a different vertex count");
    }
    EnergyResult out;
    Vertices grad = Vertices::Zero(vertices.rows(), 3);
    auto accumulate = [&](Eigen::Index j) {
        const Eigen::RowVector3d d = vertices.row(j) - target.row(j);
        out.value += d.squaredNorm();
        grad.row(j) += 2.0 * d;
    };
    if (mask.empty()) {
        for (Eigen::Index j = 0; j < vertices.rows(); ++j) accumulate(j);
    } else {
        for (const int j : mask) {
            if (j < 0 || j >= vertices.rows()) {
                throw ValidationError(
                    "target_fit_energy: mask index " + std::to_string(j) + " out of range for " +
                    std::to_string(vertices.rows()) + " vertices");
            }
            accumulate(j);
        }
    }
    out.grad_vertices.push_back(std::move(grad));
    return out;
}

} // namespace jacfield
