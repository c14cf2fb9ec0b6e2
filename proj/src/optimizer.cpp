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

#include <jacfield/energies.hpp>
#include <jacfield/error.hpp>
#include <jacfield/optimizer.hpp>

#include "parallel.hpp"

#include <chrono>
#include <cmath>

namespace jacfield {

OptimConfig OptimConfig::static_defaults()
{
    OptimConfig cfg;
    cfg.max_iters = 2000;
    return cfg;
}

OptimConfig OptimConfig::dynamic_defaults()
{
    OptimConfig cfg;
    cfg.max_iters = 3000;
    return cfg;
}

void OptimConfig::validate() const
{
    auto fail = [](const std::string& what) { throw ValidationError("invalid config: " + what); };
    if (max_iters < 0) fail("maxIters must be >= 0");
    if (!(learning_rates.jacobian > 0) || !(learning_rates.axis_angle > 0) || !(learning_rates.translation > 0)) {
        fail("learning rates must be > 0");
    }
    if (!(weights.guidance >= 0) || !(weights.flex >= 0) || !(weights.rig >= 0) || !(weights.temp >= 0)) {
        fail("weights must be >= 0");
    }
    if (!(adam.beta1 > 0 && adam.beta1 < 1) || !(adam.beta2 > 0 && adam.beta2 < 1)) fail("adam betas must be in (0,1)");
    if (!(adam.eps > 0)) fail("adam eps must be > 0");
    if (!(noise.sigma >= 0)) fail("noise sigma must be >= 0");
    if (!(convergence.rel_tol >= 0)) fail("convergence relTol must be >= 0");
    if (convergence.window < 1) fail("convergence window must be >= 1");
    if (checkpoint_every < 0) fail("checkpoint_every must be >= 0");
}

void adam_step(
    Eigen::Ref<Eigen::VectorXd> params,
    const Eigen::Ref<const Eigen::VectorXd>& grads,
    AdamState& state,
    double rate,
    const AdamConfig& cfg,
    std::string_view block)
{
    if (grads.size() != params.size()) {
        throw OptimError("adam_step: gradient size mismatch for " + std::string(block));
    }
    if (!grads.allFinite()) {
        throw OptimError("non-finite gradient in parameter block '" + std::string(block) + "'");
    }
    if (state.m.size() == 0) {
        state.m = Eigen::VectorXd::Zero(params.size());
        state.v = Eigen::VectorXd::Zero(params.size());
        state.step = 0;
    }
    ++state.step;
    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grads;
    state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grads.cwiseAbs2();
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    params.array() -= rate * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + cfg.eps);
}

NoisyGuidance::NoisyGuidance(Guidance& inner, double sigma, std::uint64_t seed)
    : m_inner(inner)
    , m_sigma(sigma)
    , m_rng(seed)
{
    if (!(sigma >= 0)) throw ValidationError("noise sigma must be >= 0");
}

GuidanceOutput NoisyGuidance::evaluate(int iter, std::span<const Vertices> frames)
{
    GuidanceOutput out = m_inner.evaluate(iter, frames);
    if (m_sigma == 0.0) return out;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& g : out.grads) {
        if (g.size() == 0) continue;
        const double rms = std::sqrt(g.squaredNorm() / static_cast<double>(g.size()));
        const double stddev = m_sigma * rms;
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
            for (int c = 0; c < 3; ++c) g(r, c) += stddev * normal(m_rng);
        }
    }
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Totals this close together count as unchanged, so a problem sitting at zero loss converges.
constexpr double kConvergenceFloor = 1e-12;

// Relative change of the total over the last `window` records.
bool has_converged(const std::vector<IterationRecord>& records, const ConvergenceConfig& cfg)
{
    const auto window = static_cast<std::size_t>(cfg.window);
    if (records.size() <= window) return false;
    const double now = records.back().total;
    const double before = records[records.size() - 1 - window].total;
    return std::abs(now - before) <= cfg.rel_tol * std::abs(before) + kConvergenceFloor;
}

bool has_diverged(const std::vector<IterationRecord>& records)
{
    const double initial = records.front().total;
    const double now = records.back().total;
    if (!std::isfinite(now)) return true;
    return initial > kConvergenceFloor && now > 1e6 * initial;
}

void check_guidance(const GuidanceOutput& out, std::size_t num_frames, Eigen::Index num_vertices)
{
    if (out.grads.size() != num_frames) {
        throw GuidanceError(
            "guidance returned " + std::to_string(out.grads.size()) + " frames, expected " +
            std::to_string(num_frames));
    }
    for (const auto& g : out.grads) {
        if (g.rows() != num_vertices) throw GuidanceError("guidance gradient has the wrong vertex count");
    }
}

JacobianField plus_identity(const JacobianField& delta)
{
    JacobianField out = delta;
    for (auto& m : out) m += Eigen::Matrix3d::Identity();
    return out;
}

} // namespace

StaticResult optimize_static(const TriMesh& init_mesh, Guidance& guidance, const OptimConfig& cfg)
{
    cfg.validate();
    const auto start = Clock::now();
    const FaceOperators ops = build_operators(init_mesh);
    const PoissonSystem system(init_mesh, ops);
    const double n = init_mesh.num_vertices();

    // Optimized as an offset from identity so the identity start reproduces V0 bitwise.
    StaticResult result;
    JacobianField delta = JacobianField::zeros(static_cast<std::size_t>(init_mesh.num_faces()));
    AdamState state;
    auto& records = result.report.per_iteration;

    for (int it = 0; it < cfg.max_iters; ++it) {
        const Vertices solved = system.solve_from_rest(delta);
        const Vertices frames[] = {solved};
        const GuidanceOutput out = guidance.evaluate(it, frames);
        check_guidance(out, 1, solved.rows());

        IterationRecord rec;
        rec.iter = it;
        rec.guidance = out.value.value_or(0.0) / n;
        rec.total = cfg.weights.guidance * rec.guidance;
        records.push_back(rec);

        if (has_diverged(records)) {
            result.report.diverged = true;
            break;
        }
        if (out.value && has_converged(records, cfg.convergence)) {
            result.report.converged = true;
            break;
        }

        const JacobianField grad = system.solve_adjoint((cfg.weights.guidance / n) * out.grads.front());
        adam_step(delta.flat(), grad.flat(), state, cfg.learning_rates.jacobian, cfg.adam, "jacobian");
    }

    result.jacobians = plus_identity(delta);
    result.static_vertices = system.solve_from_rest(delta);
    result.report.wall_time = seconds_since(start);
    return result;
}

DynamicEvaluation evaluate_dynamic(
    const PoissonSystem& system,
    const CotanWeights& weights,
    Guidance& guidance,
    const LossWeights& loss_weights,
    int iter,
    const MotionSequence& motion,
    int threads)
{
    const std::size_t L = motion.size();
    if (L == 0) throw ValidationError("evaluate_dynamic: empty motion sequence");
    const Vertices& rest = system.rest_vertices();
    const double n = system.num_vertices();
    const double m = system.num_faces();
    const double guidance_scale = 1.0 / (static_cast<double>(L) * n);
    const double flex_scale = 1.0 / (static_cast<double>(L) * m);
    const double rig_scale = 1.0 / (static_cast<double>(L) * n);
    const double temp_scale = 1.0 / (static_cast<double>(std::max<std::size_t>(L - 1, 1)) * m);
    const int num_frames = static_cast<int>(L);

    DynamicEvaluation out;
    out.frames.resize(L);
    out.grads.resize(L);
    std::vector<Vertices> solved(L), rig_grads(L);
    std::vector<double> flex_values(L), rig_values(L);
    std::vector<JacobianField> flex_grads(L);

    detail::parallel_for(threads, num_frames, [&](int i) {
        const auto& frame = motion.frames[static_cast<std::size_t>(i)];
        const JacobianField jac = plus_identity(frame.delta_j);
        solved[i] = system.solve_from_rest(frame.delta_j);
        out.frames[i] = solved[i] * rotation_exp(frame.rigid.axis_angle).transpose();
        out.frames[i].rowwise() += frame.rigid.translation.transpose();

        auto flex = flex_energy(std::span(&jac, 1));
        flex_values[i] = flex.value;
        flex_grads[i] = std::move(flex.grad_jacobians.front());
        auto rig = arap_energy(rest, std::span(&out.frames[i], 1), weights);
        rig_values[i] = rig.value;
        rig_grads[i] = std::move(rig.grad_vertices.front());
    });

    const GuidanceOutput guided = guidance.evaluate(iter, out.frames);
    check_guidance(guided, L, system.num_vertices());
    const EnergyResult temporal = temporal_smoothness(motion);

    IterationRecord& rec = out.record;
    rec.iter = iter;
    rec.guidance = guided.value.value_or(0.0) * guidance_scale;
    for (std::size_t i = 0; i < L; ++i) {
        rec.flex += flex_values[i];
        rec.rig += rig_values[i];
    }
    rec.flex *= flex_scale;
    rec.rig *= rig_scale;
    rec.temp = temporal.value * temp_scale;
    rec.total = loss_weights.guidance * rec.guidance + loss_weights.flex * rec.flex + loss_weights.rig * rec.rig +
                loss_weights.temp * rec.temp;
    out.guidance_has_value = guided.value.has_value();

    detail::parallel_for(threads, num_frames, [&](int i) {
        const Vertices grad_v = (loss_weights.guidance * guidance_scale) * guided.grads[i] +
                                (loss_weights.rig * rig_scale) * rig_grads[i];
        FrameGradient& g = out.grads[i];
        g = frame_vertices_adjoint(system, motion.frames[i], grad_v, &solved[i]);
        auto gj = g.delta_j.flat();
        gj += (loss_weights.flex * flex_scale) * flex_grads[i].flat();
        gj += (loss_weights.temp * temp_scale) * temporal.grad_jacobians[i].flat();
        g.axis_angle += (loss_weights.temp * temp_scale) * temporal.grad_rigid[i].axis_angle;
        g.translation += (loss_weights.temp * temp_scale) * temporal.grad_rigid[i].translation;
    });
    return out;
}

DynamicResult optimize_dynamic(
    const TriMesh& static_mesh,
    Guidance& guidance,
    const OptimConfig& cfg,
    int num_frames,
    const RunOptions& options)
{
    cfg.validate();
    if (num_frames < 1) throw ValidationError("frame count must be >= 1");
    const auto start = Clock::now();
    const FaceOperators ops = build_operators(static_mesh);
    const PoissonSystem system(static_mesh, ops);
    const auto L = static_cast<std::size_t>(num_frames);

    DynamicResult result;
    auto& motion = result.motion;
    motion = MotionSequence::at_rest(L, static_cast<std::size_t>(static_mesh.num_faces()), static_mesh.fingerprint());
    std::vector<AdamState> jac_state(L), rot_state(L), trans_state(L);
    auto& records = result.report.per_iteration;

    for (int it = 0; it < cfg.max_iters; ++it) {
        const DynamicEvaluation eval =
            evaluate_dynamic(system, ops.cot_weights, guidance, cfg.weights, it, motion, options.threads);
        records.push_back(eval.record);

        if (has_diverged(records)) {
            result.report.diverged = true;
            break;
        }
        if (eval.guidance_has_value && has_converged(records, cfg.convergence)) {
            result.report.converged = true;
            break;
        }

        for (std::size_t i = 0; i < L; ++i) {
            auto& frame = motion.frames[i];
            const FrameGradient& g = eval.grads[i];
            adam_step(frame.delta_j.flat(), g.delta_j.flat(), jac_state[i], cfg.learning_rates.jacobian, cfg.adam,
                      "deltaJ");
            adam_step(frame.rigid.axis_angle, g.axis_angle, rot_state[i], cfg.learning_rates.axis_angle, cfg.adam,
                      "axisAngle");
            adam_step(frame.rigid.translation, g.translation, trans_state[i], cfg.learning_rates.translation,
                      cfg.adam, "translation");
            frame.rigid.axis_angle = canonicalize_axis_angle(frame.rigid.axis_angle);
        }

        if (options.on_checkpoint && cfg.checkpoint_every > 0 && (it + 1) % cfg.checkpoint_every == 0) {
            options.on_checkpoint(it + 1, motion);
        }
    }

    result.frames.resize(L);
    detail::parallel_for(options.threads, num_frames, [&](int i) {
        result.frames[i] = frame_vertices(system, motion.frames[static_cast<std::size_t>(i)]);
    });
    result.report.wall_time = seconds_since(start);
    return result;
}

BaselineResult optimize_vertex_baseline(
    const TriMesh& static_mesh,
    Guidance& guidance,
    const OptimConfig& cfg,
    int num_frames,
    const RunOptions& options)
{
    cfg.validate();
    if (num_frames < 1) throw ValidationError("frame count must be >= 1");
    const auto start = Clock::now();
    const FaceOperators ops = build_operators(static_mesh);
    const Vertices& rest = static_mesh.vertices();
    const auto L = static_cast<std::size_t>(num_frames);
    const double n = static_mesh.num_vertices();

    const double guidance_scale = 1.0 / (static_cast<double>(L) * n);
    const double rig_scale = 1.0 / (static_cast<double>(L) * n);
    const double temp_scale = 1.0 / (static_cast<double>(std::max<std::size_t>(L - 1, 1)) * n);

    BaselineResult result;
    result.displacements.assign(L, Vertices::Zero(rest.rows(), 3));
    auto& disp = result.displacements;
    std::vector<AdamState> state(L);
    auto& records = result.report.per_iteration;

    std::vector<Vertices> frames(L), rig_grads(L);
    std::vector<double> rig_values(L);

    for (int it = 0; it < cfg.max_iters; ++it) {
        detail::parallel_for(options.threads, num_frames, [&](int i) {
            frames[i] = rest + disp[i];
            auto rig = arap_energy(rest, std::span(&frames[i], 1), ops.cot_weights);
            rig_values[i] = rig.value;
            rig_grads[i] = std::move(rig.grad_vertices.front());
        });
        const GuidanceOutput out = guidance.evaluate(it, frames);
        check_guidance(out, L, static_mesh.num_vertices());

        std::vector<Vertices> temp_grads(L, Vertices::Zero(rest.rows(), 3));
        double temp_value = 0.0;
        for (std::size_t i = 0; i + 1 < L; ++i) {
            const Vertices d = disp[i + 1] - disp[i];
            temp_value += d.squaredNorm();
            temp_grads[i + 1] += 2.0 * d;
            temp_grads[i] -= 2.0 * d;
        }

        IterationRecord rec;
        rec.iter = it;
        rec.guidance = out.value.value_or(0.0) * guidance_scale;
        for (std::size_t i = 0; i < L; ++i) rec.rig += rig_values[i];
        rec.rig *= rig_scale;
        rec.temp = temp_value * temp_scale;
        rec.total = cfg.weights.guidance * rec.guidance + cfg.weights.rig * rec.rig + cfg.weights.temp * rec.temp;
        records.push_back(rec);

        if (has_diverged(records)) {
            result.report.diverged = true;
            break;
        }
        if (out.value && has_converged(records, cfg.convergence)) {
            result.report.converged = true;
            break;
        }

        for (std::size_t i = 0; i < L; ++i) {
            Vertices g = (cfg.weights.guidance * guidance_scale) * out.grads[i] +
                         (cfg.weights.rig * rig_scale) * rig_grads[i] + (cfg.weights.temp * temp_scale) * temp_grads[i];
            Eigen::Map<Eigen::VectorXd> params(disp[i].data(), disp[i].size());
            Eigen::Map<const Eigen::VectorXd> flat(g.data(), g.size());
            adam_step(params, flat, state[i], cfg.learning_rates.jacobian, cfg.adam, "displacement");
        }
    }

    for (std::size_t i = 0; i < L; ++i) frames[i] = rest + disp[i];
    result.frames = std::move(frames);
    result.report.wall_time = seconds_since(start);
    return result;
}

} // namespace jacfield
