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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace jacfield {

/// OBJ contents before any mesh validation. Polygons are already fan-triangulated
/// and indices are 0-based.
struct RawObj
{
    std::vector<Eigen::Vector3d> positions;
    std::vector<Eigen::Vector2d> uvs;
    std::vector<Eigen::Vector3i> faces;
    /// Parallel to `faces`; -1 entries where a corner has no `vt` index.
    std::vector<Eigen::Vector3i> face_uvs;
    /// Source line of each triangle, for diagnostics.
    std::vector<std::size_t> face_lines;
};

struct ObjIssue
{
    std::size_t line = 0;
    std::string message;
};

/// Parse OBJ text. Stops at the first malformed record with a ParseError.
RawObj parse_obj(std::istream& in);

/// Parse OBJ text collecting every malformed record into `issues` instead of throwing.
RawObj parse_obj_lenient(std::istream& in, std::vector<ObjIssue>& issues);

/// Validate a parsed OBJ into a mesh. Throws ValidationError naming the first bad face.
TriMesh to_mesh(const RawObj& raw);

TriMesh load_obj(std::istream& in);
TriMesh load_obj(const std::filesystem::path& path);

/// Vertices are written with 17 significant digits so load_obj round-trips exactly.
void save_obj(std::ostream& out, const TriMesh& mesh);
void save_obj(std::ostream& out, const TriMesh& mesh, const Vertices& positions);
void save_obj(const std::filesystem::path& path, const TriMesh& mesh, const Vertices& positions);

} // namespace jacfield
