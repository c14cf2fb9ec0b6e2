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

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace jacfield {

/// One 3x3 matrix per face, indexed like the faces of the mesh it was built against.
class JacobianField
{
public:
    JacobianField() = default;
    explicit JacobianField(std::size_t num_faces, const Eigen::Matrix3d& fill = Eigen::Matrix3d::Zero())
        : m_matrices(num_faces, fill)
    {}
    explicit JacobianField(std::vector<Eigen::Matrix3d> matrices)
        : m_matrices(std::move(matrices))
    {}

    static JacobianField identity(std::size_t num_faces) { return JacobianField(num_faces, Eigen::Matrix3d::Identity()); }
    static JacobianField zeros(std::size_t num_faces) { return JacobianField(num_faces); }

    std::size_t size() const { return m_matrices.size(); }
    bool empty() const { return m_matrices.empty(); }

    Eigen::Matrix3d& operator[](std::size_t j) { return m_matrices[j]; }
    const Eigen::Matrix3d& operator[](std::size_t j) const { return m_matrices[j]; }

    auto begin() { return m_matrices.begin(); }
    auto end() { return m_matrices.end(); }
    auto begin() const { return m_matrices.begin(); }
    auto end() const { return m_matrices.end(); }

    bool all_finite() const;

    /// Flat view, 9 doubles per face in column-major order (Eigen's storage).
    Eigen::Map<Eigen::VectorXd> flat();
    Eigen::Map<const Eigen::VectorXd> flat() const;

    JacobianField& operator+=(const JacobianField& other);
    JacobianField& operator*=(double s);

    friend JacobianField operator+(JacobianField a, const JacobianField& b) { return a += b; }
    friend JacobianField operator*(double s, JacobianField a) { return a *= s; }

    bool operator==(const JacobianField& other) const = default;

private:
    std::vector<Eigen::Matrix3d> m_matrices;
};

/// Binary layout: "JACF", u32 version (1), u64 face count, then 9 little-endian f64 per face, row-major.
void write_jacobians_binary(std::ostream& out, const JacobianField& field);
JacobianField read_jacobians_binary(std::istream& in);

/// JSON layout: {"format":"jacfield","version":1,"faces":M,"matrices":[[9 row-major numbers], ...]}.
void write_jacobians_json(std::ostream& out, const JacobianField& field);
JacobianField read_jacobians_json(std::istream& in);

void save_jacobians(const std::filesystem::path& path, const JacobianField& field);
/// Reads either layout, decided by the leading bytes.
JacobianField load_jacobians(const std::filesystem::path& path);

} // namespace jacfield
