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

#include <jacfield/guidance.hpp>
#include <jacfield/motion.hpp>

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace jacfield {

struct LearningRates
{
    double jacobian = 1e-2;
    double axis_angle = 1e-2;
    double translation = 1e-2;
};

struct LossWeights
{
    double guidance = 1.0;
    double flex = 0.005;
    double rig = 1.0;
    double temp = 0.01;
};

struct AdamConfig
{
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct NoiseConfig
{
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

struct ConvergenceConfig
{
    double rel_tol = 1e-6;
    int window = 50;
};

struct OptimConfig
{
    int max_iters = 3000;
    LearningRates learning_rates;
    LossWeights weights;
    AdamConfig adam;
    NoiseConfig noise;
    ConvergenceConfig convergence;
    int checkpoint_every = 100;

    static OptimConfig static_defaults();
    static OptimConfig dynamic_defaults();

    /// Throws ValidationError when a field is out of its domain.
    void validate() const;
};

struct IterationRecord
{
    int iter = 0;
    double total = 0.0;
    double guidance = 0.0;
    double flex = 0.0;
    double rig = 0.0;
    double temp = 0.0;
};

struct OptimReport
{
    std::vector<IterationRecord> per_iteration;
    bool converged = false;
    bool diverged = false;
    double wall_time = 0.0;
};

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamState
{
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    long step = 0;
};

/// One bias-corrected Adam update of `params` in place. Zero-sized state is initialized on first
/// use. Throws OptimError naming `block` when a gradient entry is not finite.
void adam_step(
    Eigen::Ref<Eigen::VectorXd> params,
    const Eigen::Ref<const Eigen::VectorXd>& grads,
    AdamState& state,
    double rate,
    const AdamConfig& cfg,
    std::string_view block = "params");

// ---------------------------------------------------------------------------
// Guidance wrappers
// ---------------------------------------------------------------------------

///
/// Adds zero-mean Gaussian noise to every gradient component of the wrapped guidance. The
/// standard deviation is sigma times the RMS of that frame's gradient. Deterministic for a seed.
///
class NoisyGuidance final : public Guidance
{
public:
    NoisyGuidance(Guidance& inner, double sigma, std::uint64_t seed);
    GuidanceOutput evaluate(int iter, std::span<const Vertices> frames) override;

private:
    Guidance& m_inner;
    double m_sigma;
    std::mt19937_64 m_rng;
};

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

struct RunOptions
{
    /// Per-frame worker threads. Results do not depend on it.
    int threads = 1;
    /// Called every cfg.checkpoint_every iterations with the current parameters.
    std::function<void(int iter, const MotionSequence&)> on_checkpoint;
};

struct StaticResult
{
    Vertices static_vertices;
    JacobianField jacobians;
    OptimReport report;
};

/// Fit Jacobians (identity initialized) over `init_mesh` so the solved shape minimizes guidance.
StaticResult optimize_static(const TriMesh& init_mesh, Guidance& guidance, const OptimConfig& cfg);

/// Weighted dynamic objective and its gradient with respect to every frame's parameters.
struct DynamicEvaluation
{
    IterationRecord record;
    bool guidance_has_value = false;
    std::vector<Vertices> frames;
    std::vector<FrameGradient> grads;
};

DynamicEvaluation evaluate_dynamic(
    const PoissonSystem& system,
    const CotanWeights& weights,
    Guidance& guidance,
    const LossWeights& loss_weights,
    int iter,
    const MotionSequence& motion,
    int threads = 1);

struct DynamicResult
{
    MotionSequence motion;
    std::vector<Vertices> frames;
    OptimReport report;
};

///
/// Optimize per-frame delta Jacobians and rigid motions over `static_mesh`:
///
///     total = w_g * guidance / (L N) + w_flex * flex / (L M) + w_rig * arap / (L N)
///           + w_temp * temporal / ((L - 1) M)
///
DynamicResult optimize_dynamic(
    const TriMesh& static_mesh,
    Guidance& guidance,
    const OptimConfig& cfg,
    int num_frames,
    const RunOptions& options = {});

struct BaselineResult
{
    std::vector<Vertices> displacements;
    std::vector<Vertices> frames;
    OptimReport report;
};

/// Ablation baseline: the same loop over raw per-frame vertex displacements, no Poisson solve.
/// Uses the Jacobian learning rate for displacements; flex does not apply.
BaselineResult optimize_vertex_baseline(
    const TriMesh& static_mesh,
    Guidance& guidance,
    const OptimConfig& cfg,
    int num_frames,
    const RunOptions& options = {});

} // namespace jacfield
