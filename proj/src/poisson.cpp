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
#include <jacfield/poisson.hpp>

namespace jacfield {

namespace {

// Stack Jacobians as the 3M x 3 target for the gradient operator: block f is J_f^T.
Eigen::Matrix<double, Eigen::Dynamic, 3> stack_targets(const JacobianField& jacobians)
{
    Eigen::Matrix<double, Eigen::Dynamic, 3> stacked(3 * static_cast<Eigen::Index>(jacobians.size()), 3);
    for (std::size_t f = 0; f < jacobians.size(); ++f) {
        stacked.middleRows<3>(3 * static_cast<Eigen::Index>(f)) = jacobians[f].transpose();
    }
    return stacked;
}

} // namespace

PoissonSystem::PoissonSystem(const TriMesh& mesh, const FaceOperators& ops)
{
    const int n = mesh.num_vertices();
    const int m = mesh.num_faces();
    if (ops.num_vertices != n || ops.areas.size() != m) {
        throw ValidationError("operators were built for a different mesh");
    }
    if (const int components = count_components(n, mesh.faces()); components != 1) {
        throw SolveError(
            "cannot factorize Poisson system: mesh has " + std::to_string(components) +
            " components (each needs its own anchor)");
    }

    auto state = std::make_shared<State>();
    state->num_vertices = n;
    state->num_faces = m;
    state->fingerprint = mesh.fingerprint();
    state->rest_centroid = mesh.vertices().colwise().mean();
    state->rest_vertices = mesh.vertices();

    Eigen::VectorXd row_weights(3 * m);
    for (int f = 0; f < m; ++f) row_weights.segment<3>(3 * f).setConstant(ops.areas[f]);
    state->weighted_gradient = row_weights.asDiagonal() * ops.gradient;
    state->rhs_op = state->weighted_gradient.transpose();
    const Eigen::SparseMatrix<double> product = state->rhs_op * ops.gradient;
    state->stiffness = 0.5 * (product + Eigen::SparseMatrix<double>(product.transpose()));
    state->stiffness.makeCompressed();

    // Pin vertex 0; the remaining block is SPD for a connected mesh.
    const Eigen::SparseMatrix<double> pinned = state->stiffness.bottomRightCorner(n - 1, n - 1);
    state->factor.compute(pinned);
    if (state->factor.info() != Eigen::Success) {
        throw SolveError("Cholesky factorization of the pinned Poisson system failed");
    }
    m_state = std::move(state);
}

Vertices PoissonSystem::centered_solve(const JacobianField& jacobians, const char* caller) const
{
    const auto& s = *m_state;
    if (static_cast<int>(jacobians.size()) != s.num_faces) {
        throw ValidationError(
            std::string(caller) + ": JacobianField has " + std::to_string(jacobians.size()) + " entries, mesh has " +
            std::to_string(s.num_faces) + " faces");
    }
    const Eigen::Matrix<double, Eigen::Dynamic, 3> rhs = s.rhs_op * stack_targets(jacobians);
    Vertices x(s.num_vertices, 3);
    x.row(0).setZero();
    x.bottomRows(s.num_vertices - 1) = s.factor.solve(rhs.bottomRows(s.num_vertices - 1));
    const Eigen::RowVector3d mean = x.colwise().mean();
    x.rowwise() -= mean;
    return x;
}

Vertices PoissonSystem::solve(const JacobianField& jacobians) const
{
    Vertices x = centered_solve(jacobians, "solve");
    x.rowwise() += m_state->rest_centroid;
    return x;
}

Vertices PoissonSystem::solve_from_rest(const JacobianField& delta_j) const
{
    return m_state->rest_vertices + centered_solve(delta_j, "solve_from_rest");
}

JacobianField PoissonSystem::solve_adjoint(const Vertices& grad_vertices) const
{
    const auto& s = *m_state;
    if (grad_vertices.rows() != s.num_vertices) {
        throw ValidationError(
            "solve_adjoint: gradient has " + std::to_string(grad_vertices.rows()) + " rows, expected " +
            std::to_string(s.num_vertices));
    }
    // Transpose of the centroid re-anchoring, then of the pinned solve, then of G^T M.
    Vertices centered = grad_vertices.rowwise() - grad_vertices.colwise().mean();
    Vertices z(s.num_vertices, 3);
    z.row(0).setZero();
    z.bottomRows(s.num_vertices - 1) = s.factor.solve(centered.bottomRows(s.num_vertices - 1));
    const Eigen::Matrix<double, Eigen::Dynamic, 3> stacked = s.weighted_gradient * z;

    JacobianField grad(static_cast<std::size_t>(s.num_faces));
    for (int f = 0; f < s.num_faces; ++f) {
        grad[static_cast<std::size_t>(f)] = stacked.middleRows<3>(3 * f).transpose();
    }
    return grad;
}

PoissonSystem build_system(const TriMesh& mesh, const FaceOperators& ops)
{
    return PoissonSystem(mesh, ops);
}

} // namespace jacfield
