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
#include <jacfield/operators.hpp>

#include <Eigen/SparseCholesky>

#include <cstdint>
#include <memory>

namespace jacfield {

///
/// Prefactorized area-weighted least-squares Poisson problem
///
///     min_X  sum_j |f_j| * || grad_j(X) - J_j ||^2
///
/// on a fixed rest mesh. The stiffness L = G^T M G is factorized once with vertex 0
/// pinned; every solution is then translated so its vertex centroid equals the rest
/// centroid. Immutable after construction, so solve() and solve_adjoint() may run
/// concurrently.
///
class PoissonSystem
{
public:
    PoissonSystem(const TriMesh& mesh, const FaceOperators& ops);

    /// Vertex positions best matching `jacobians`.
    Vertices solve(const JacobianField& jacobians) const;

    /// solve(I + delta_j), written as the rest mesh plus the solved offset. Returns the rest
    /// vertices bitwise when delta_j is zero.
    Vertices solve_from_rest(const JacobianField& delta_j) const;

    /// Pull a loss gradient w.r.t. solve()'s output back to the Jacobians.
    JacobianField solve_adjoint(const Vertices& grad_vertices) const;

    /// Full (unpinned) stiffness G^T M G.
    const Eigen::SparseMatrix<double>& stiffness() const { return m_state->stiffness; }
    /// G^T M, mapping stacked per-face gradient rows to vertex right-hand sides.
    const Eigen::SparseMatrix<double>& rhs_operator() const { return m_state->rhs_op; }
    const Eigen::RowVector3d& rest_centroid() const { return m_state->rest_centroid; }
    const Vertices& rest_vertices() const { return m_state->rest_vertices; }

    int num_vertices() const { return m_state->num_vertices; }
    int num_faces() const { return m_state->num_faces; }
    std::uint64_t mesh_fingerprint() const { return m_state->fingerprint; }

private:
    Vertices centered_solve(const JacobianField& jacobians, const char* caller) const;

    struct State
    {
        Eigen::SparseMatrix<double> stiffness;
        Eigen::SparseMatrix<double> rhs_op;
        Eigen::SparseMatrix<double> weighted_gradient; // M G
        Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> factor; // pinned stiffness
        Eigen::RowVector3d rest_centroid;
        Vertices rest_vertices;
        int num_vertices = 0;
        int num_faces = 0;
        std::uint64_t fingerprint = 0;
    };

    std::shared_ptr<const State> m_state;
};

/// Convenience: operators and system for one mesh.
PoissonSystem build_system(const TriMesh& mesh, const FaceOperators& ops);

} // namespace jacfield
