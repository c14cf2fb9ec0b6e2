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

#include <jacfield/energies.hpp>
#include <jacfield/error.hpp>
#include <jacfield/optimizer.hpp>
#include <jacfield/presets.hpp>

#include <doctest.h>

using namespace jacfield;

namespace {

double rmse(const Vertices& a, const Vertices& b)
{
    return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.rows()));
}

Vertices centered_scale(const Vertices& v, double s)
{
    const Eigen::RowVector3d c = v.colwise().mean();
    Vertices out = (v.rowwise() - c) * s;
    out.rowwise() += c;
    return out;
}

bool same_records(const OptimReport& a, const OptimReport& b)
{
    if (a.per_iteration.size() != b.per_iteration.size()) return false;
    for (std::size_t i = 0; i < a.per_iteration.size(); ++i) {
        const auto& x = a.per_iteration[i];
        const auto& y = b.per_iteration[i];
        if (x.total != y.total || x.guidance != y.guidance || x.flex != y.flex || x.rig != y.rig || x.temp != y.temp) {
            return false;
        }
    }
    return a.converged == b.converged;
}

} // namespace

TEST_CASE("adam_step")
{
    const AdamConfig cfg;
    SUBCASE("zero gradient leaves parameters in place")
    {
        Eigen::VectorXd p = Eigen::VectorXd::LinSpaced(4, -1, 1);
        const Eigen::VectorXd before = p;
        AdamState state;
        adam_step(p, Eigen::VectorXd::Zero(4), state, 0.1, cfg);
        CHECK(p == before);
        CHECK(state.m.isZero(0));
        CHECK(state.step == 1);

        state.m.setConstant(1.0);
        state.v.setConstant(1.0);
        Eigen::VectorXd q = before;
        adam_step(q, Eigen::VectorXd::Zero(4), state, 0.1, cfg);
        CHECK((state.m.array() == 0.9).all());
        CHECK((state.v.array() == 0.999).all());
    }
    SUBCASE("scripted trace with unit gradient")
    {
        Eigen::VectorXd p = Eigen::VectorXd::Zero(1);
        AdamState state;
        const double expected[] = {-0.09999999900000001, -0.19999999800000002, -0.29999999700000003};
        for (double e : expected) {
            adam_step(p, Eigen::VectorXd::Ones(1), state, 0.1, cfg);
            CHECK(std::abs(p[0] - e) < 1e-12);
        }
    }
    SUBCASE("steps stay within the learning rate")
    {
        Eigen::VectorXd p = Eigen::VectorXd::Zero(8);
        AdamState state;
        for (int k = 0; k < 200; ++k) {
            Eigen::VectorXd g(8);
            g << 3.0, -0.01, 1e3, 1e-6, -7.0, 0.5, 42.0, -1e-3;
            const Eigen::VectorXd before = p;
            adam_step(p, g, state, 0.05, cfg);
            CHECK((p - before).cwiseAbs().maxCoeff() <= 0.05 * (1 + 1e-6));
        }
    }
    SUBCASE("non-finite gradients name the block")
    {
        Eigen::VectorXd p = Eigen::VectorXd::Zero(2);
        AdamState state;
        Eigen::VectorXd g(2);
        g << 1.0, std::nan("");
        CHECK_THROWS_WITH_AS(adam_step(p, g, state, 0.1, cfg, "deltaJ"), doctest::Contains("deltaJ"), OptimError);
        CHECK_THROWS_AS(adam_step(p, Eigen::VectorXd::Zero(3), state, 0.1, cfg), OptimError);
    }
}

TEST_CASE("OptimConfig::validate")
{
    CHECK_NOTHROW(OptimConfig::static_defaults().validate());
    CHECK(OptimConfig::static_defaults().max_iters == 2000);
    CHECK(OptimConfig::dynamic_defaults().max_iters == 3000);
    OptimConfig cfg;
    cfg.learning_rates.axis_angle = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.adam.beta2 = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.convergence.window = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.weights.rig = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("optimize_static")
{
    SUBCASE("rest target is a fixed point")
    {
        const TriMesh mesh = make_icosphere(1, 1.0);
        TargetGuidance g({mesh.vertices()});
        const auto r = optimize_static(mesh, g, OptimConfig::static_defaults());
        CHECK(r.report.converged);
        CHECK(r.report.per_iteration.back().total < 1e-10);
        CHECK((r.static_vertices - mesh.vertices()).cwiseAbs().maxCoeff() < 1e-8);
        for (const auto& j : r.jacobians) CHECK((j - Eigen::Matrix3d::Identity()).norm() < 1e-6);
    }
    SUBCASE("centered uniform scale")
    {
        const TriMesh mesh = make_icosphere(2, 1.0);
        REQUIRE(mesh.num_vertices() <= 500);
        const Vertices target = centered_scale(mesh.vertices(), 2.0);
        TargetGuidance g({target});
        const auto r = optimize_static(mesh, g, OptimConfig::static_defaults());
        CHECK(r.report.per_iteration.size() <= 2000);
        CHECK((r.static_vertices - target).cwiseAbs().maxCoeff() < 1e-3);
        const FaceOperators ops = build_operators(mesh);
        const JacobianField recovered = compute_jacobians(mesh, ops, r.static_vertices);
        double worst = 0.0;
        for (const auto& j : recovered) worst = std::max(worst, (j - 2.0 * Eigen::Matrix3d::Identity()).norm());
        CHECK(worst < 1e-2);
    }
    SUBCASE("bent bar")
    {
        const TriMesh bar = make_box(8, 2, 2, 4.0, 0.5, 0.5);
        Vertices target = bend_bar(bar.vertices(), 0.4);
        target.rowwise() += bar.vertices().colwise().mean() - target.colwise().mean();
        TargetGuidance g({target});
        const auto r = optimize_static(bar, g, OptimConfig::static_defaults());
        CHECK(rmse(r.static_vertices, target) < 0.01 * bbox_diagonal(target));
    }
    SUBCASE("zero guidance stays at identity")
    {
        const TriMesh mesh = make_grid(4, 3, 1.0, 1.0);
        ZeroGuidance g;
        const auto r = optimize_static(mesh, g, OptimConfig::static_defaults());
        CHECK(r.report.converged);
        CHECK(r.jacobians == JacobianField::identity(static_cast<std::size_t>(mesh.num_faces())));
    }
    SUBCASE("divergence aborts with a report")
    {
        const TriMesh mesh = make_grid(4, 3, 1.0, 1.0);
        TargetGuidance g({centered_scale(mesh.vertices(), 2.0)});
        OptimConfig cfg = OptimConfig::static_defaults();
        cfg.learning_rates.jacobian = 1e4;
        const auto r = optimize_static(mesh, g, cfg);
        CHECK(r.report.diverged);
        CHECK_FALSE(r.report.converged);
        CHECK(r.report.per_iteration.size() < 2000);
    }
}

TEST_CASE("evaluate_dynamic gradient matches finite differences of the total")
{
    std::mt19937_64 rng(91);
    for (int trial = 0; trial < 4; ++trial) {
        const TriMesh mesh = test::random_mesh(200 + trial, trial);
        REQUIRE(mesh.num_vertices() <= 100);
        const FaceOperators ops = build_operators(mesh);
        const PoissonSystem system(mesh, ops);
        const std::size_t L = 3, M = static_cast<std::size_t>(mesh.num_faces());
        std::vector<Vertices> targets;
        for (std::size_t i = 0; i < L; ++i) targets.push_back(mesh.vertices() + 0.1 * test::random_vertices(rng, mesh.num_vertices()));
        TargetGuidance guidance(targets);

        MotionSequence motion = MotionSequence::at_rest(L, M, 0);
        for (auto& f : motion.frames) {
            for (auto& j : f.delta_j) j = test::random_matrix(rng, 0.2);
            f.rigid.axis_angle = 0.5 * Eigen::Vector3d::Random();
            f.rigid.translation = 0.5 * Eigen::Vector3d::Random();
        }
        LossWeights w;
        w.flex = 0.3;
        w.rig = 2.0;
        w.temp = 0.7;

        const auto eval = evaluate_dynamic(system, ops.cot_weights, guidance, w, 0, motion);
        CHECK(eval.guidance_has_value);
        const auto& rec = eval.record;
        CHECK(std::abs(rec.total - (w.guidance * rec.guidance + w.flex * rec.flex + w.rig * rec.rig + w.temp * rec.temp)) <
              1e-9);

        auto total_at = [&](const MotionSequence& m) {
            return evaluate_dynamic(system, ops.cot_weights, guidance, w, 0, m).record.total;
        };
        const double h = 1e-6;
        for (std::size_t i = 0; i < L; ++i) {
            // Rigid parameters coordinate-wise.
            for (int k = 0; k < 6; ++k) {
                MotionSequence p = motion, q = motion;
                auto& pv = k < 3 ? p.frames[i].rigid.axis_angle : p.frames[i].rigid.translation;
                auto& qv = k < 3 ? q.frames[i].rigid.axis_angle : q.frames[i].rigid.translation;
                pv[k % 3] += h;
                qv[k % 3] -= h;
                const double fd = (total_at(p) - total_at(q)) / (2 * h);
                const double an = k < 3 ? eval.grads[i].axis_angle[k] : eval.grads[i].translation[k - 3];
                CHECK(std::abs(fd - an) <= 1e-3 * std::max(std::abs(fd), 1e-3));
            }
            // Delta Jacobians along a random direction.
            JacobianField dir(M);
            for (auto& d : dir) d = test::random_matrix(rng);
            MotionSequence p = motion, q = motion;
            p.frames[i].delta_j.flat() += h * dir.flat();
            q.frames[i].delta_j.flat() -= h * dir.flat();
            const double fd = (total_at(p) - total_at(q)) / (2 * h);
            const double an = eval.grads[i].delta_j.flat().dot(dir.flat());
            CHECK(std::abs(fd - an) <= 1e-3 * std::max(std::abs(fd), 1e-3));
        }
    }
}

TEST_CASE("optimize_dynamic")
{
    SUBCASE("zero guidance is stationary")
    {
        const TriMesh mesh = make_grid(5, 4, 1.0, 1.0);
        ZeroGuidance g;
        const auto r = optimize_dynamic(mesh, g, OptimConfig::dynamic_defaults(), 4);
        CHECK(r.report.converged);
        CHECK(r.report.per_iteration.size() < 100);
        for (const auto& rec : r.report.per_iteration) CHECK(rec.total < 1e-20);
        for (const auto& f : r.motion.frames) {
            CHECK(f.delta_j.flat().cwiseAbs().maxCoeff() < 1e-6);
            CHECK(f.rigid.axis_angle.norm() < 1e-6);
            CHECK(f.rigid.translation.norm() < 1e-6);
        }
        for (const auto& f : r.frames) CHECK((f - mesh.vertices()).cwiseAbs().maxCoeff() < 1e-8);
    }
    SUBCASE("translate-line path is absorbed by the rigid motion")
    {
        const TriMesh mesh = make_icosphere(1, 1.0);
        const int L = 6;
        const auto path = translate_line_path(mesh.vertices(), L);
        TargetGuidance g(translate_line_targets(mesh.vertices(), L));
        const auto r = optimize_dynamic(mesh, g, OptimConfig::dynamic_defaults(), L);
        double mean_dj = 0.0;
        for (int i = 0; i < L; ++i) {
            CHECK((r.motion.frames[i].rigid.translation - path[i]).norm() < 1e-2);
            for (const auto& j : r.motion.frames[i].delta_j) mean_dj += j.norm();
        }
        mean_dj /= L * mesh.num_faces();
        CHECK(mean_dj < 0.05);
    }
    SUBCASE("flag wave")
    {
        const TriMesh flag = make_grid(12, 8, 1.5, 1.0);
        const int L = 8;
        const auto targets = flag_wave_targets(flag.vertices(), L);
        TargetGuidance g(targets);
        const auto r = optimize_dynamic(flag, g, OptimConfig::dynamic_defaults(), L);
        const double diag = bbox_diagonal(flag.vertices());
        for (int i = 0; i < L; ++i) CHECK(rmse(r.frames[i], targets[i]) < 0.02 * diag);
        const FaceOperators ops = build_operators(flag);
        const double achieved = arap_energy(flag.vertices(), r.frames, ops.cot_weights).value;
        const double reference = arap_energy(flag.vertices(), targets, ops.cot_weights).value;
        CHECK(achieved < 10.0 * reference);
    }
    SUBCASE("checkpoints fire on schedule and threads do not change results")
    {
        const TriMesh flag = make_grid(6, 4, 1.5, 1.0);
        TargetGuidance g(flag_wave_targets(flag.vertices(), 3));
        OptimConfig cfg = OptimConfig::dynamic_defaults();
        cfg.max_iters = 40;
        cfg.checkpoint_every = 15;
        std::vector<int> seen;
        RunOptions opts;
        opts.on_checkpoint = [&](int it, const MotionSequence& m) {
            seen.push_back(it);
            CHECK(m.size() == 3);
        };
        const auto single = optimize_dynamic(flag, g, cfg, 3, opts);
        CHECK(seen == std::vector<int>{15, 30});
        opts.threads = 3;
        const auto multi = optimize_dynamic(flag, g, cfg, 3, opts);
        CHECK(same_records(single.report, multi.report));
        for (int i = 0; i < 3; ++i) CHECK(single.frames[i] == multi.frames[i]);
    }
    SUBCASE("bad frame count")
    {
        ZeroGuidance g;
        CHECK_THROWS_AS(optimize_dynamic(make_grid(2, 2, 1, 1), g, OptimConfig::dynamic_defaults(), 0), ValidationError);
    }
}

TEST_CASE("NoisyGuidance")
{
    const TriMesh flag = make_grid(8, 5, 1.5, 1.0);
    const auto targets = flag_wave_targets(flag.vertices(), 3);
    OptimConfig cfg = OptimConfig::dynamic_defaults();
    cfg.max_iters = 150;

    SUBCASE("sigma zero reproduces the inner guidance")
    {
        TargetGuidance plain(targets);
        TargetGuidance inner(targets);
        NoisyGuidance quiet(inner, 0.0, 99);
        const auto a = optimize_dynamic(flag, plain, cfg, 3);
        const auto b = optimize_dynamic(flag, quiet, cfg, 3);
        CHECK(same_records(a.report, b.report));
        for (int i = 0; i < 3; ++i) CHECK(a.frames[i] == b.frames[i]);
    }
    SUBCASE("fixed seed is deterministic, other seeds differ")
    {
        auto run = [&](std::uint64_t seed) {
            TargetGuidance inner(targets);
            NoisyGuidance noisy(inner, 0.5, seed);
            return optimize_dynamic(flag, noisy, cfg, 3);
        };
        const auto a = run(4), b = run(4), c = run(5);
        CHECK(same_records(a.report, b.report));
        CHECK_FALSE(same_records(a.report, c.report));
    }
    SUBCASE("noise scale follows the gradient RMS")
    {
        const Vertices rest = flag.vertices();
        TargetGuidance inner({rest + Vertices::Constant(rest.rows(), 3, 0.5)});
        NoisyGuidance noisy(inner, 0.5, 1);
        const Vertices frames[] = {rest};
        const auto clean = inner.evaluate(0, frames);
        double sum2 = 0.0;
        const int draws = 200;
        for (int k = 0; k < draws; ++k) {
            const auto out = noisy.evaluate(k, frames);
            CHECK(out.value == clean.value);
            sum2 += (out.grads[0] - clean.grads[0]).squaredNorm();
        }
        const double measured = std::sqrt(sum2 / (draws * rest.size()));
        CHECK(measured == doctest::Approx(0.5 * 1.0).epsilon(0.02));
    }
    ZeroGuidance zero;
    CHECK_THROWS_AS(NoisyGuidance(zero, -1.0, 0), ValidationError);
}

TEST_CASE("optimize_vertex_baseline")
{
    SUBCASE("zero guidance keeps zero displacements")
    {
        const TriMesh mesh = make_grid(5, 4, 1.0, 1.0);
        ZeroGuidance g;
        const auto r = optimize_vertex_baseline(mesh, g, OptimConfig::dynamic_defaults(), 3);
        for (const auto& d : r.displacements) CHECK(d.isZero(0));
        CHECK(r.report.converged);
    }
    SUBCASE("noiseless target fit is exact")
    {
        std::mt19937_64 rng(8);
        const TriMesh mesh = make_grid(5, 4, 1.0, 1.0);
        std::vector<Vertices> targets;
        for (int i = 0; i < 3; ++i) targets.push_back(mesh.vertices() + 0.2 * test::random_vertices(rng, mesh.num_vertices()));
        TargetGuidance g(targets);
        OptimConfig cfg = OptimConfig::dynamic_defaults();
        cfg.weights.rig = 0.0;
        cfg.weights.temp = 0.0;
        cfg.convergence.rel_tol = 0.0;
        // Large eps turns Adam into heavy-ball descent, which converges linearly on a quadratic.
        cfg.adam.eps = 1.0;
        cfg.learning_rates.jacobian = 1.0;
        cfg.max_iters = 2000;
        const auto r = optimize_vertex_baseline(mesh, g, cfg, 3);
        for (int i = 0; i < 3; ++i) CHECK((r.frames[i] - targets[i]).cwiseAbs().maxCoeff() < 1e-6);
    }
}
