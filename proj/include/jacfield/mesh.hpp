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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace jacfield {

/// Faces whose area falls at or below this floor are rejected.
inline constexpr double kAreaFloor = 1e-12;

/// Texture coordinates carried through untouched. `faces` has one row per mesh face.
struct UVLayer
{
    UVs coords;
    Faces faces;
};

///
/// Rest-pose triangle mesh. Construction validates every invariant, so a TriMesh
/// in hand always has in-range, distinct face indices, face areas above kAreaFloor
/// and edges shared by at most two faces.
///
class TriMesh
{
public:
    TriMesh(Vertices vertices, Faces faces, std::optional<UVLayer> uv = std::nullopt);

    const Vertices& vertices() const { return m_vertices; }
    const Faces& faces() const { return m_faces; }
    const std::optional<UVLayer>& uv() const { return m_uv; }

    int num_vertices() const { return static_cast<int>(m_vertices.rows()); }
    int num_faces() const { return static_cast<int>(m_faces.rows()); }

    /// Same connectivity and uv, new positions. Positions are re-validated.
    TriMesh with_vertices(Vertices vertices) const;

    /// Fingerprint of positions and connectivity; binds solver state to one mesh.
    std::uint64_t fingerprint() const { return m_fingerprint; }

private:
    Vertices m_vertices;
    Faces m_faces;
    std::optional<UVLayer> m_uv;
    std::uint64_t m_fingerprint = 0;
};

double face_area(const Vertices& vertices, const Eigen::Vector3i& face);

/// Connected components over vertices; vertices referenced by no face count as their own
/// component. Faces must already be in range.
int count_components(int num_vertices, const Faces& faces);

struct EdgeCounts
{
    int boundary = 0;
    int interior = 0;
    int non_manifold = 0;
};

EdgeCounts count_edges(const Faces& faces);

/// Undirected edges (i < j) in a stable order.
std::vector<std::pair<int, int>> unique_edges(const Faces& faces);

/// Dihedral angle (radians, 0 = flat) at every interior edge, for the given positions.
std::vector<double> dihedral_angles(const Faces& faces, const Vertices& vertices);

/// Population variance of the dihedral angles of one surface; 0 without interior edges.
double dihedral_variance(const Faces& faces, const Vertices& vertices);

/// Length of the bounding-box diagonal.
double bbox_diagonal(const Vertices& vertices);

} // namespace jacfield
