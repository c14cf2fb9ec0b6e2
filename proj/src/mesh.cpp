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

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string_view>
#include <tuple>

namespace jacfield {

namespace {

std::uint64_t hash_bytes(const void* data, std::size_t size, std::uint64_t seed)
{
    const std::string_view view(static_cast<const char*>(data), size);
    const std::uint64_t h = std::hash<std::string_view>{}(view);
    return seed ^ (h + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2));
}

struct DirectedEdgeRef
{
    int lo;
    int hi;
    int face;

    auto key() const { return std::pair(lo, hi); }
};

// Every face edge keyed by its sorted endpoints, sorted so shared edges are adjacent.
std::vector<DirectedEdgeRef> sorted_edge_refs(const Faces& faces)
{
    std::vector<DirectedEdgeRef> refs;
    refs.reserve(static_cast<std::size_t>(faces.rows()) * 3);
    for (int f = 0; f < faces.rows(); ++f) {
        for (int k = 0; k < 3; ++k) {
            const int a = faces(f, k);
            const int b = faces(f, (k + 1) % 3);
            refs.push_back({std::min(a, b), std::max(a, b), f});
        }
    }
    std::sort(refs.begin(), refs.end(), [](const auto& x, const auto& y) {
        return std::tie(x.lo, x.hi, x.face) < std::tie(y.lo, y.hi, y.face);
    });
    return refs;
}

template <typename Fn>
void for_each_edge_group(const std::vector<DirectedEdgeRef>& refs, Fn&& fn)
{
    std::size_t i = 0;
    while (i < refs.size()) {
        std::size_t j = i + 1;
        while (j < refs.size() && refs[j].key() == refs[i].key()) ++j;
        fn(refs[i].lo, refs[i].hi, std::span(refs.data() + i, j - i));
        i = j;
    }
}

} // namespace

double face_area(const Vertices& vertices, const Eigen::Vector3i& face)
{
    const Eigen::Vector3d a = vertices.row(face[0]).transpose();
    const Eigen::Vector3d b = vertices.row(face[1]).transpose();
    const Eigen::Vector3d c = vertices.row(face[2]).transpose();
    return 0.5 * (b - a).cross(c - a).norm();
}

TriMesh::TriMesh(Vertices vertices, Faces faces, std::optional<UVLayer> uv)
    : m_vertices(std::move(vertices))
    , m_faces(std::move(faces))
    , m_uv(std::move(uv))
{
    const int n = num_vertices();
    if (!m_vertices.allFinite()) {
        throw ValidationError("vertex positions must be finite");
    }
    for (int f = 0; f < num_faces(); ++f) {
        for (int k = 0; k < 3; ++k) {
            const int v = m_faces(f, k);
            if (v < 0 || v >= n) {
                std::ostringstream msg;
                msg << "face " << f << " references vertex " << v << " of " << n;
                throw ValidationError(msg.str());
            }
        }
        const Eigen::Vector3i face = m_faces.row(f).transpose();
        if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
            std::ostringstream msg;
            msg << "face " << f << " repeats a vertex (" << face[0] << ' ' << face[1] << ' ' << face[2] << ')';
            throw ValidationError(msg.str());
        }
        const double area = face_area(m_vertices, face);
        if (!(area > kAreaFloor)) {
            std::ostringstream msg;
            msg << "face " << f << " is degenerate (area " << area << " <= " << kAreaFloor << ')';
            throw ValidationError(msg.str());
        }
    }
    for_each_edge_group(sorted_edge_refs(m_faces), [](int lo, int hi, auto group) {
        if (group.size() > 2) {
            std::ostringstream msg;
            msg << "edge (" << lo << ", " << hi << ") is shared by " << group.size() << " faces";
            throw ValidationError(msg.str());
        }
    });
    if (m_uv) {
        if (m_uv->faces.rows() != m_faces.rows()) {
            throw ValidationError("uv face count does not match mesh face count");
        }
        const auto nuv = m_uv->coords.rows();
        if (m_uv->faces.size() > 0 && (m_uv->faces.minCoeff() < 0 || m_uv->faces.maxCoeff() >= nuv)) {
            throw ValidationError("uv face index out of range");
        }
    }

    std::uint64_t h = static_cast<std::uint64_t>(m_vertices.rows()) * 31u + static_cast<std::uint64_t>(m_faces.rows());
    h = hash_bytes(m_vertices.data(), sizeof(double) * static_cast<std::size_t>(m_vertices.size()), h);
    h = hash_bytes(m_faces.data(), sizeof(int) * static_cast<std::size_t>(m_faces.size()), h);
    m_fingerprint = h;
}

TriMesh TriMesh::with_vertices(Vertices vertices) const
{
    if (vertices.rows() != m_vertices.rows()) {
        throw ValidationError("with_vertices: vertex count mismatch");
    }
    return TriMesh(std::move(vertices), m_faces, m_uv);
}

int count_components(int num_vertices, const Faces& faces)
{
    std::vector<int> parent(static_cast<std::size_t>(num_vertices));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    int components = num_vertices;
    for (int f = 0; f < faces.rows(); ++f) {
        for (int k = 0; k < 3; ++k) {
            const int a = find(faces(f, k));
            const int b = find(faces(f, (k + 1) % 3));
            if (a != b) {
                parent[std::max(a, b)] = std::min(a, b);
                --components;
            }
        }
    }
    return components;
}

EdgeCounts count_edges(const Faces& faces)
{
    EdgeCounts counts;
    for_each_edge_group(sorted_edge_refs(faces), [&](int, int, auto group) {
        if (group.size() == 1) {
            ++counts.boundary;
        } else if (group.size() == 2) {
            ++counts.interior;
        } else {
            ++counts.non_manifold;
        }
    });
    return counts;
}

std::vector<std::pair<int, int>> unique_edges(const Faces& faces)
{
    std::vector<std::pair<int, int>> edges;
    for_each_edge_group(sorted_edge_refs(faces), [&](int lo, int hi, auto) { edges.emplace_back(lo, hi); });
    return edges;
}

std::vector<double> dihedral_angles(const Faces& faces, const Vertices& vertices)
{
    auto normal = [&](int f) {
        const Eigen::Vector3d a = vertices.row(faces(f, 0)).transpose();
        const Eigen::Vector3d b = vertices.row(faces(f, 1)).transpose();
        const Eigen::Vector3d c = vertices.row(faces(f, 2)).transpose();
        return (b - a).cross(c - a).normalized().eval();
    };
    std::vector<double> angles;
    for_each_edge_group(sorted_edge_refs(faces), [&](int, int, auto group) {
        if (group.size() != 2) return;
        const Eigen::Vector3d n0 = normal(group[0].face);
        const Eigen::Vector3d n1 = normal(group[1].face);
        angles.push_back(std::atan2(n0.cross(n1).norm(), n0.dot(n1)));
    });
    return angles;
}

double dihedral_variance(const Faces& faces, const Vertices& vertices)
{
    const auto angles = dihedral_angles(faces, vertices);
    if (angles.empty()) return 0.0;
    const double n = static_cast<double>(angles.size());
    const double mean = std::accumulate(angles.begin(), angles.end(), 0.0) / n;
    double var = 0.0;
    for (double a : angles) var += (a - mean) * (a - mean);
    return var / n;
}

double bbox_diagonal(const Vertices& vertices)
{
    if (vertices.rows() == 0) return 0.0;
    return (vertices.colwise().maxCoeff() - vertices.colwise().minCoeff()).norm();
}

} // namespace jacfield
