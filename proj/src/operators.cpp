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
#include <jacfield/operators.hpp>

#include <Eigen/Geometry>

#include <algorithm>
#include <map>
#include <stdexcept>

namespace jacfield {

CotanWeights::CotanWeights(int num_vertices, std::vector<std::pair<int, int>> edges, std::vector<double> weights)
    : m_edges(std::move(edges))
    , m_weights(std::move(weights))
    , m_rings(static_cast<std::size_t>(num_vertices))
{
    for (std::size_t e = 0; e < m_edges.size(); ++e) {
        const auto [j, k] = m_edges[e];
        m_rings[static_cast<std::size_t>(j)].push_back({k, m_weights[e]});
        m_rings[static_cast<std::size_t>(k)].push_back({j, m_weights[e]});
    }
    for (auto& ring : m_rings) {
        std::sort(ring.begin(), ring.end(), [](const auto& a, const auto& b) { return a.vertex < b.vertex; });
    }
}

double CotanWeights::at(int j, int k) const
{
    const auto& ring = m_rings.at(static_cast<std::size_t>(j));
    auto it = std::lower_bound(ring.begin(), ring.end(), k, [](const Neighbor& n, int v) { return n.vertex < v; });
    if (it == ring.end() || it->vertex != k) {
        throw std::out_of_range("(" + std::to_string(j) + ", " + std::to_string(k) + ") is not an edge");
    }
    return it->weight;
}

FaceOperators build_operators(const TriMesh& mesh)
{
    const auto& V = mesh.vertices();
    const auto& F = mesh.faces();
    const int m = mesh.num_faces();

    FaceOperators ops;
    ops.num_vertices = mesh.num_vertices();
    ops.areas.resize(m);
    ops.normals.resize(m, 3);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(m) * 9);
    std::map<std::pair<int, int>, double> cot;

    for (int f = 0; f < m; ++f) {
        Eigen::Vector3d p[3];
        for (int i = 0; i < 3; ++i) p[i] = V.row(F(f, i)).transpose();
        const Eigen::Vector3d n = (p[1] - p[0]).cross(p[2] - p[0]);
        const double area = 0.5 * n.norm();
        if (!(area > kAreaFloor)) {
            throw ValidationError("face " + std::to_string(f) + " is degenerate");
        }
        const Eigen::Vector3d unit_n = n / n.norm();
        ops.areas[f] = area;
        ops.normals.row(f) = unit_n.transpose();

        for (int i = 0; i < 3; ++i) {
            const int i1 = (i + 1) % 3;
            const int i2 = (i + 2) % 3;
            // Hat-function gradient of corner i: rotate the opposite edge into the plane.
            const Eigen::Vector3d grad = unit_n.cross(p[i2] - p[i1]) / (2.0 * area);
            for (int d = 0; d < 3; ++d) {
                triplets.emplace_back(3 * f + d, F(f, i), grad[d]);
            }
            // Angle at corner i sits opposite edge (i1, i2).
            const Eigen::Vector3d e1 = p[i1] - p[i];
            const Eigen::Vector3d e2 = p[i2] - p[i];
            const double cot_angle = e1.dot(e2) / e1.cross(e2).norm();
            const int a = F(f, i1);
            const int b = F(f, i2);
            cot[{std::min(a, b), std::max(a, b)}] += 0.5 * cot_angle;
        }
    }

    ops.gradient.resize(3 * m, mesh.num_vertices());
    ops.gradient.setFromTriplets(triplets.begin(), triplets.end());
    ops.gradient.makeCompressed();

    std::vector<std::pair<int, int>> edges;
    std::vector<double> weights;
    edges.reserve(cot.size());
    weights.reserve(cot.size());
    for (const auto& [edge, w] : cot) {
        edges.push_back(edge);
        weights.push_back(w);
    }
    ops.cot_weights = CotanWeights(mesh.num_vertices(), std::move(edges), std::move(weights));
    return ops;
}

JacobianField compute_jacobians(const TriMesh& mesh, const FaceOperators& ops, const Vertices& deformed)
{
    if (deformed.rows() != ops.num_vertices || ops.num_vertices != mesh.num_vertices()) {
        throw ValidationError(
            "compute_jacobians: expected " + std::to_string(ops.num_vertices) + " vertices, got " +
            std::to_string(deformed.rows()));
    }
    const auto& F = mesh.faces();
    const Eigen::Matrix<double, Eigen::Dynamic, 3> stacked = ops.gradient * deformed;
    JacobianField field(static_cast<std::size_t>(F.rows()));
    for (int f = 0; f < F.rows(); ++f) {
        Eigen::Matrix3d jac = stacked.middleRows<3>(3 * f).transpose();

        const Eigen::Vector3d a = deformed.row(F(f, 0)).transpose();
        const Eigen::Vector3d b = deformed.row(F(f, 1)).transpose();
        const Eigen::Vector3d c = deformed.row(F(f, 2)).transpose();
        const Eigen::Vector3d n = (b - a).cross(c - a);
        const double n_len = n.norm();
        if (n_len > 0.0) {
            const double scale = std::sqrt(0.5 * n_len / ops.areas[f]);
            jac += scale * (n / n_len) * ops.normals.row(f);
        }
        field[static_cast<std::size_t>(f)] = jac;
    }
    return field;
}

} // namespace jacfield
