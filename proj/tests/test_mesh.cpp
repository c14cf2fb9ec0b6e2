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

#include "test_helpers.hpp"

#include <jacfield/error.hpp>
#include <jacfield/log.hpp>
#include <jacfield/obj_io.hpp>
#include <jacfield/operators.hpp>

#include <doctest.h>

#include <sstream>

using namespace jacfield;

namespace {

TriMesh parse(const std::string& text)
{
    std::istringstream in(text);
    return load_obj(in);
}

std::string validation_message(const std::string& text)
{
    try {
        parse(text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

TriMesh two_equilateral()
{
    Vertices v(4, 3);
    const double h = std::sqrt(3.0) / 2.0;
    v << 0, 0, 0, 1, 0, 0, 0.5, h, 0, 0.5, -h, 0;
    Faces f(2, 3);
    f << 0, 1, 2, 1, 0, 3;
    return TriMesh(v, f);
}

} // namespace

TEST_CASE("load_obj: minimal triangle")
{
    const TriMesh m = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
    CHECK(m.num_vertices() == 3);
    CHECK(m.num_faces() == 1);
    CHECK(m.faces().row(0) == Eigen::RowVector3i(0, 1, 2));
    CHECK_FALSE(m.uv().has_value());
}

TEST_CASE("load_obj: quads are fan triangulated")
{
    const TriMesh m = parse("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
    REQUIRE(m.num_faces() == 2);
    CHECK(m.faces().row(0) == Eigen::RowVector3i(0, 1, 2));
    CHECK(m.faces().row(1) == Eigen::RowVector3i(0, 2, 3));
}

TEST_CASE("load_obj: slash syntax, negative indices, comments and ignored records")
{
    std::vector<std::string> warnings;
    auto previous = set_warning_sink([&](std::string_view w) { warnings.emplace_back(w); });
    const TriMesh m = parse(
        "# a comment\n"
        "o thing\n"
        "v 0 0 0\nv 1 0 0\nv 0 1 0 # trailing\n"
        "vt 0 0\nvt 1 0\nvt 0 1\n"
        "vn 0 0 1\n"
        "f -3/1/1 -2/2/1 -1/3/1\n");
    set_warning_sink(previous);
    CHECK(m.faces().row(0) == Eigen::RowVector3i(0, 1, 2));
    REQUIRE(m.uv().has_value());
    CHECK(m.uv()->faces.row(0) == Eigen::RowVector3i(0, 1, 2));
    CHECK(warnings.size() == 2); // 'o' and 'vn', once each
}

TEST_CASE("load_obj: errors")
{
    SUBCASE("out-of-range index names the face and vertex")
    {
        CHECK(validation_message("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n") == "face 0 references vertex 8 of 3");
    }
    SUBCASE("malformed record reports its line")
    {
        std::istringstream in("v 0 0 0\nv 1 zero 0\n");
        try {
            load_obj(in);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }
    SUBCASE("zero index")
    {
        CHECK_THROWS_AS(parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n"), ParseError);
    }
    SUBCASE("degenerate face is named")
    {
        const auto msg = validation_message("v 0 0 0\nv 1 0 0\nv 2 0 0\nv 0 1 0\nf 1 2 4\nf 1 2 3\n");
        CHECK(msg.find("face 1 is degenerate") != std::string::npos);
    }
    SUBCASE("repeated vertex")
    {
        CHECK(validation_message("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 1 2\n").find("face 0") != std::string::npos);
    }
    SUBCASE("edge shared by three faces")
    {
        const auto msg = validation_message(
            "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 -1 0\nv 0 0 1\nf 1 2 3\nf 2 1 4\nf 1 2 5\n");
        CHECK(msg.find("shared by 3 faces") != std::string::npos);
    }
}

TEST_CASE("save_obj round trip")
{
    SUBCASE("single triangle is bitwise equal")
    {
        Vertices v(3, 3);
        v << 0.1, 1.0 / 3.0, -2.5e-7, 1.0, std::sqrt(2.0), 0.0, 0.0, 1.0, 1e10 / 7.0;
        Faces f(1, 3);
        f << 0, 1, 2;
        const TriMesh m(v, f);
        std::stringstream io;
        save_obj(io, m);
        const TriMesh back = load_obj(io);
        CHECK(back.vertices() == m.vertices());
        CHECK(back.faces() == m.faces());
    }
    SUBCASE("uv records are emitted")
    {
        const TriMesh m = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nf 1/1 2/2 3/3\n");
        std::stringstream io;
        save_obj(io, m);
        const std::string text = io.str();
        CHECK(text.find("vt ") != std::string::npos);
        CHECK(text.find("f 1/1 2/2 3/3") != std::string::npos);
        const TriMesh back = load_obj(io);
        REQUIRE(back.uv().has_value());
        CHECK(back.uv()->coords == m.uv()->coords);
    }
    SUBCASE("random 200+ vertex meshes round trip within 1e-12")
    {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const TriMesh m = jitter(make_grid(14, 13, 3.0, 2.0), 0.2, seed);
            REQUIRE(m.num_vertices() >= 200);
            std::stringstream io;
            save_obj(io, m);
            const TriMesh back = load_obj(io);
            CHECK((back.vertices() - m.vertices()).cwiseAbs().maxCoeff() <= 1e-12);
            CHECK(back.faces() == m.faces());
        }
    }
}

TEST_CASE("build_operators: equilateral interior edge weight")
{
    const FaceOperators ops = build_operators(two_equilateral());
    CHECK(ops.cot_weights.at(0, 1) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
    CHECK(ops.cot_weights.at(1, 0) == ops.cot_weights.at(0, 1));
    // Boundary edges keep half of the single opposite cotangent.
    CHECK(ops.cot_weights.at(0, 2) == doctest::Approx(0.5 / std::sqrt(3.0)).epsilon(1e-12));
    CHECK_THROWS_AS(ops.cot_weights.at(2, 3), std::out_of_range);
}

TEST_CASE("build_operators: hat-function gradients")
{
    Vertices v(3, 3);
    v << 0, 0, 0, 1, 0, 0, 0, 1, 0;
    Faces f(1, 3);
    f << 0, 1, 2;
    const FaceOperators ops = build_operators(TriMesh(v, f));
    const Eigen::MatrixXd g = Eigen::MatrixXd(ops.gradient);
    // phi_0 = 1 - x - y, phi_1 = x, phi_2 = y
    Eigen::MatrixXd expected(3, 3);
    expected << -1, 1, 0, -1, 0, 1, 0, 0, 0;
    CHECK((g - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(ops.areas[0] == doctest::Approx(0.5));
}

TEST_CASE("build_operators: properties on random meshes")
{
    for (int trial = 0; trial < 12; ++trial) {
        const TriMesh mesh = test::random_mesh(100 + trial, trial);
        const FaceOperators ops = build_operators(mesh);
        CAPTURE(trial);

        // Gradients of constants vanish.
        const Eigen::VectorXd ones = Eigen::VectorXd::Constant(mesh.num_vertices(), 3.7);
        CHECK((ops.gradient * ones).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(ops.areas.minCoeff() > 0.0);

        // G^T M G against a cotangent Laplacian assembled from edge lengths.
        Eigen::VectorXd w(3 * mesh.num_faces());
        for (int j = 0; j < mesh.num_faces(); ++j) w.segment<3>(3 * j).setConstant(ops.areas[j]);
        const Eigen::SparseMatrix<double> gtmg = Eigen::SparseMatrix<double>(ops.gradient.transpose()) * w.asDiagonal() * ops.gradient;
        const Eigen::MatrixXd oracle = test::cotan_laplacian_from_lengths(mesh);
        CHECK((Eigen::MatrixXd(gtmg) - oracle).cwiseAbs().maxCoeff() < 1e-10);

        // Off-diagonals are exactly the negated edge weights.
        for (std::size_t e = 0; e < ops.cot_weights.edges().size(); ++e) {
            const auto [a, b] = ops.cot_weights.edges()[e];
            CHECK(std::abs(oracle(a, b) + ops.cot_weights.weights()[e]) < 1e-10);
        }
    }
}

TEST_CASE("compute_jacobians")
{
    std::mt19937_64 rng(7);
    const TriMesh mesh = test::random_mesh(3, 1);
    const FaceOperators ops = build_operators(mesh);
    const Vertices& rest = mesh.vertices();

    SUBCASE("identity map")
    {
        for (const auto& j : compute_jacobians(mesh, ops, rest)) CHECK((j - Eigen::Matrix3d::Identity()).norm() < 1e-12);
    }
    SUBCASE("uniform scaling")
    {
        for (const auto& j : compute_jacobians(mesh, ops, 2.0 * rest)) {
            CHECK((j - 2.0 * Eigen::Matrix3d::Identity()).norm() < 1e-12);
        }
    }
    SUBCASE("rotation")
    {
        for (int t = 0; t < 5; ++t) {
            const Eigen::Matrix3d r = test::random_rotation(rng);
            for (const auto& j : compute_jacobians(mesh, ops, rest * r.transpose())) CHECK((j - r).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
    SUBCASE("affine maps act correctly on the tangent plane")
    {
        for (int t = 0; t < 5; ++t) {
            const Eigen::Matrix3d a = Eigen::Matrix3d::Identity() + test::random_matrix(rng, 0.4);
            const Eigen::RowVector3d b = Eigen::RowVector3d::Random();
            Vertices deformed = rest * a.transpose();
            deformed.rowwise() += b;
            const JacobianField jac = compute_jacobians(mesh, ops, deformed);
            for (int f = 0; f < mesh.num_faces(); ++f) {
                const Eigen::Vector3d n = ops.normals.row(f).transpose();
                const Eigen::Matrix3d tangent = Eigen::Matrix3d::Identity() - n * n.transpose();
                CHECK(((jac[f] - a) * tangent).cwiseAbs().maxCoeff() < 1e-10);
            }
        }
    }
    SUBCASE("shape mismatch")
    {
        CHECK_THROWS_AS(compute_jacobians(mesh, ops, Vertices::Zero(3, 3)), ValidationError);
    }
}

TEST_CASE("mesh diagnostics")
{
    const TriMesh grid = make_grid(3, 2, 3.0, 2.0);
    const EdgeCounts edges = count_edges(grid.faces());
    CHECK(edges.boundary == 10);
    CHECK(edges.non_manifold == 0);
    CHECK(count_components(grid.num_vertices(), grid.faces()) == 1);
    CHECK(dihedral_variance(grid.faces(), grid.vertices()) == doctest::Approx(0.0));

    const TriMesh box = make_box(2, 2, 2, 1, 1, 1);
    CHECK(count_edges(box.faces()).boundary == 0);
    // All box dihedral angles are 0 or pi/2.
    for (double a : dihedral_angles(box.faces(), box.vertices())) {
        CHECK((std::abs(a) < 1e-12 || std::abs(a - M_PI / 2) < 1e-12));
    }

    Faces two(2, 3);
    two << 0, 1, 2, 3, 4, 5;
    CHECK(count_components(6, two) == 2);
    CHECK(count_components(7, two) == 3);
}
