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
#include <jacfield/mesh.hpp>
#include <jacfield/presets.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace jacfield {

std::vector<Eigen::Vector3d> translate_line_path(const Vertices& rest, int num_frames)
{
    const double diag = bbox_diagonal(rest);
    const Eigen::Vector3d end = Eigen::Vector3d(0.5, 0.25, 0.0) * diag;
    std::vector<Eigen::Vector3d> path;
    for (int i = 0; i < num_frames; ++i) {
        const double s = num_frames > 1 ? static_cast<double>(i) / (num_frames - 1) : 0.0;
        path.push_back(s * end);
    }
    return path;
}

std::vector<Vertices> translate_line_targets(const Vertices& rest, int num_frames)
{
    std::vector<Vertices> targets;
    for (const auto& t : translate_line_path(rest, num_frames)) {
        Vertices v = rest;
        v.rowwise() += t.transpose();
        targets.push_back(std::move(v));
    }
    return targets;
}

std::vector<Vertices> flag_wave_targets(const Vertices& rest, int num_frames)
{
    constexpr double kAmplitude = 0.08;
    constexpr double kCycles = 1.0;
    const double amplitude = kAmplitude * bbox_diagonal(rest);
    const double x0 = rest.col(0).minCoeff();
    const double width = rest.col(0).maxCoeff() - x0;
    std::vector<Vertices> targets;
    for (int i = 0; i < num_frames; ++i) {
        const double phase = static_cast<double>(i) / num_frames;
        Vertices v = rest;
        for (Eigen::Index r = 0; r < v.rows(); ++r) {
            const double s = width > 0 ? (rest(r, 0) - x0) / width : 0.0;
            v(r, 2) += amplitude * s * std::sin(2.0 * std::numbers::pi * (kCycles * s - phase));
        }
        targets.push_back(std::move(v));
    }
    return targets;
}

std::vector<Vertices> preset_targets(std::string_view name, const Vertices& rest, int num_frames)
{
    if (name == "translate-line") return translate_line_targets(rest, num_frames);
    if (name == "flag-wave") return flag_wave_targets(rest, num_frames);
    throw ValidationError("unknown preset '" + std::string(name) + "' (expected translate-line or flag-wave)");
}

} // namespace jacfield
