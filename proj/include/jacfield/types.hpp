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

namespace jacfield {

/// N x 3 vertex positions, one row per vertex.
using Vertices = Eigen::Matrix<double, Eigen::Dynamic, 3>;
/// M x 3 vertex indices, one row per triangle.
using Faces = Eigen::Matrix<int, Eigen::Dynamic, 3>;
using UVs = Eigen::Matrix<double, Eigen::Dynamic, 2>;

} // namespace jacfield
