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

#include <jacfield/jacobian_field.hpp>
#include <jacfield/mesh.hpp>

#include <Eigen/SparseCore>

#include <utility>
#include <vector>

namespace jacfield {

///
/// Symmetric cotangent edge weights w(j,k) = (cot a + cot b) / 2, with the single
/// opposite angle halved on boundary edges.
///
class CotanWeights
{
public:
    struct Neighbor
    {
        int vertex;
        double weight;
    };

    CotanWeights() = default;
    CotanWeights(int num_vertices, std::vector<std::pair<int, int>> edges, std::vector<double> weights);

    /// Weight of the undirected edge (j, k); throws std::out_of_range if it is not an edge.
    double at(int j, int k) const;

    const std::vector<std::pair<int, int>>& edges() const { return m_edges; }
    const std::vector<double>& weights() const { return m_weights; }

    /// One-ring of vertex j with edge weights, sorted by neighbor index.
    const std::vector<Neighbor>& neighbors(int j) const { return m_rings[static_cast<std::size_t>(j)]; }

    int num_vertices() const { return static_cast<int>(m_rings.size()); }

private:
    std::vector<std::pair<int, int>> m_edges;
    std::vector<double> m_weights;
    std::vector<std::vector<Neighbor>> m_rings;
};

///
/// Discrete differential operators of a rest mesh.
///
/// Row 3j+d of `gradient` holds the d-th spatial component of the hat-function gradients
/// on face j, so `gradient * f` stacks per-face gradients of the vertex function f.
///
struct FaceOperators
{
    Eigen::SparseMatrix<double> gradient; // 3M x N
    Eigen::VectorXd areas;                // M
    Eigen::Matrix<double, Eigen::Dynamic, 3> normals; // M x 3, unit
    CotanWeights cot_weights;
    int num_vertices = 0;
};

FaceOperators build_operators(const TriMesh& mesh);

///
/// Per-face Jacobians of a deformation of the rest mesh.
///
/// Row c of J_j is the surface gradient of coordinate c of `deformed`. That map is only
/// defined on the rest tangent plane; the normal direction is completed by sending the
/// rest unit normal to the deformed unit normal scaled by sqrt(deformed area / rest area).
/// Identity, uniform scaling and rotations therefore return I, sI and R exactly.
///
JacobianField compute_jacobians(const TriMesh& mesh, const FaceOperators& ops, const Vertices& deformed);

} // namespace jacfield
