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

#include <jacfield/mesh.hpp>

#include <cstdint>

namespace jacfield {

/// Planar grid in the xy plane spanning [0, width] x [0, height], split into triangles.
TriMesh make_grid(int nx, int ny, double width, double height);

/// Closed box [0,sx]x[0,sy]x[0,sz] with `n` subdivisions along each axis.
TriMesh make_box(int nx, int ny, int nz, double sx, double sy, double sz);

/// Subdivided icosahedron projected to a sphere of `radius` about the origin.
TriMesh make_icosphere(int subdivisions, double radius);

/// UV sphere with `rings` latitude bands and `segments` longitude segments.
TriMesh make_uv_sphere(int rings, int segments, double radius);

/// Bend a bar lying along +x about the y axis with curvature `kappa` (1/radius).
Vertices bend_bar(const Vertices& vertices, double kappa);

/// Randomly jitter vertices by up to `amount` times the local edge scale; stays valid for small amounts.
TriMesh jitter(const TriMesh& mesh, double amount, std::uint64_t seed);

} // namespace jacfield
