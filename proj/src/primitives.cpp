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
#include <jacfield/primitives.hpp>

#include <Eigen/Geometry>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace jacfield {

namespace {

TriMesh from_lists(const std::vector<Eigen::Vector3d>& verts, const std::vector<Eigen::Vector3i>& tris)
{
    Vertices v(static_cast<Eigen::Index>(verts.size()), 3);
    for (std::size_t i = 0; i < verts.size(); ++i) v.row(static_cast<Eigen::Index>(i)) = verts[i].transpose();
    Faces f(static_cast<Eigen::Index>(tris.size()), 3);
    for (std::size_t i = 0; i < tris.size(); ++i) f.row(static_cast<Eigen::Index>(i)) = tris[i].transpose();
    return TriMesh(std::move(v), std::move(f));
}

// Orient a triangle so its normal agrees with `outward`.
Eigen::Vector3i oriented(const std::vector<Eigen::Vector3d>& verts, Eigen::Vector3i t, const Eigen::Vector3d& outward)
{
    const Eigen::Vector3d n = (verts[t[1]] - verts[t[0]]).cross(verts[t[2]] - verts[t[0]]);
    if (n.dot(outward) < 0) std::swap(t[1], t[2]);
    return t;
}

} // namespace

TriMesh make_grid(int nx, int ny, double width, double height)
{
    if (nx < 1 || ny < 1) throw ValidationError("make_grid: need at least one cell per axis");
    std::vector<Eigen::Vector3d> verts;
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) verts.emplace_back(width * i / nx, height * j / ny, 0.0);
    }
    auto id = [&](int i, int j) { return j * (nx + 1) + i; };
    std::vector<Eigen::Vector3i> tris;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            tris.emplace_back(id(i, j), id(i + 1, j), id(i + 1, j + 1));
            tris.emplace_back(id(i, j), id(i + 1, j + 1), id(i, j + 1));
        }
    }
    return from_lists(verts, tris);
}

TriMesh make_box(int nx, int ny, int nz, double sx, double sy, double sz)
{
    if (nx < 1 || ny < 1 || nz < 1) throw ValidationError("make_box: need at least one cell per axis");
    const int n[3] = {nx, ny, nz};
    const double s[3] = {sx, sy, sz};
    std::map<std::array<int, 3>, int> index;
    std::vector<Eigen::Vector3d> verts;
    auto id = [&](std::array<int, 3> p) {
        auto [it, inserted] = index.try_emplace(p, static_cast<int>(verts.size()));
        if (inserted) verts.emplace_back(s[0] * p[0] / n[0], s[1] * p[1] / n[1], s[2] * p[2] / n[2]);
        return it->second;
    };
    std::vector<Eigen::Vector3i> tris;
    const Eigen::Vector3d center(0.5 * sx, 0.5 * sy, 0.5 * sz);
    for (int axis = 0; axis < 3; ++axis) {
        const int u = (axis + 1) % 3;
        const int v = (axis + 2) % 3;
        for (int side = 0; side <= 1; ++side) {
            Eigen::Vector3d outward = Eigen::Vector3d::Zero();
            outward[axis] = side ? 1.0 : -1.0;
            for (int a = 0; a < n[u]; ++a) {
                for (int b = 0; b < n[v]; ++b) {
                    auto corner = [&](int da, int db) {
                        std::array<int, 3> p{};
                        p[axis] = side * n[axis];
                        p[u] = a + da;
                        p[v] = b + db;
                        return id(p);
                    };
                    const int c00 = corner(0, 0), c10 = corner(1, 0), c11 = corner(1, 1), c01 = corner(0, 1);
                    tris.push_back({c00, c10, c11});
                    tris.push_back({c00, c11, c01});
                }
            }
            for (std::size_t t = tris.size() - 2 * static_cast<std::size_t>(n[u] * n[v]); t < tris.size(); ++t) {
                tris[t] = oriented(verts, tris[t], outward);
            }
        }
    }
    return from_lists(verts, tris);
}

TriMesh make_icosphere(int subdivisions, double radius)
{
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::Vector3d> verts = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
    };
    for (auto& v : verts) v.normalize();
    std::vector<Eigen::Vector3i> tris = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
        {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
    };
    for (int level = 0; level < subdivisions; ++level) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto [it, inserted] = midpoint.try_emplace(key, static_cast<int>(verts.size()));
            if (inserted) verts.push_back((verts[a] + verts[b]).normalized());
            return it->second;
        };
        std::vector<Eigen::Vector3i> next;
        next.reserve(tris.size() * 4);
        for (const auto& f : tris) {
            const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        tris = std::move(next);
    }
    for (auto& v : verts) v *= radius;
    return from_lists(verts, tris);
}

TriMesh make_uv_sphere(int rings, int segments, double radius)
{
    if (rings < 2 || segments < 3) throw ValidationError("make_uv_sphere: need rings >= 2 and segments >= 3");
    std::vector<Eigen::Vector3d> verts;
    verts.emplace_back(0, 0, radius);
    for (int r = 1; r < rings; ++r) {
        const double phi = std::numbers::pi * r / rings;
        for (int s = 0; s < segments; ++s) {
            const double theta = 2.0 * std::numbers::pi * s / segments;
            verts.emplace_back(radius * std::sin(phi) * std::cos(theta), radius * std::sin(phi) * std::sin(theta),
                               radius * std::cos(phi));
        }
    }
    verts.emplace_back(0, 0, -radius);
    const int south = static_cast<int>(verts.size()) - 1;
    auto ring = [&](int r, int s) { return 1 + (r - 1) * segments + (s % segments); };
    std::vector<Eigen::Vector3i> tris;
    for (int s = 0; s < segments; ++s) {
        tris.push_back(oriented(verts, {0, ring(1, s), ring(1, s + 1)}, verts[ring(1, s)]));
        tris.push_back(oriented(verts, {south, ring(rings - 1, s), ring(rings - 1, s + 1)}, verts[ring(rings - 1, s)]));
    }
    for (int r = 1; r + 1 < rings; ++r) {
        for (int s = 0; s < segments; ++s) {
            const int a = ring(r, s), b = ring(r, s + 1), c = ring(r + 1, s + 1), d = ring(r + 1, s);
            tris.push_back(oriented(verts, {a, b, c}, verts[a] + verts[c]));
            tris.push_back(oriented(verts, {a, c, d}, verts[a] + verts[c]));
        }
    }
    return from_lists(verts, tris);
}

Vertices bend_bar(const Vertices& vertices, double kappa)
{
    if (kappa == 0.0) return vertices;
    const double radius = 1.0 / kappa;
    Vertices out = vertices;
    for (Eigen::Index r = 0; r < vertices.rows(); ++r) {
        const double theta = kappa * vertices(r, 0);
        const double z = vertices(r, 2);
        out(r, 0) = (radius - z) * std::sin(theta);
        out(r, 2) = radius - (radius - z) * std::cos(theta);
    }
    return out;
}

TriMesh jitter(const TriMesh& mesh, double amount, std::uint64_t seed)
{
    const auto& V = mesh.vertices();
    const auto& F = mesh.faces();
    double total = 0.0;
    for (int f = 0; f < F.rows(); ++f) {
        for (int k = 0; k < 3; ++k) total += (V.row(F(f, k)) - V.row(F(f, (k + 1) % 3))).norm();
    }
    const double scale = amount * total / (3.0 * static_cast<double>(std::max<Eigen::Index>(F.rows(), 1)));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Vertices out = V;
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        for (int c = 0; c < 3; ++c) out(r, c) += scale * uni(rng);
    }
    return mesh.with_vertices(std::move(out));
}

} // namespace jacfield
