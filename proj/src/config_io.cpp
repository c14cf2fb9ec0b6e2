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

#include <jacfield/config_io.hpp>
#include <jacfield/error.hpp>

#include <cstdio>
#include <fstream>

namespace jacfield {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where)
{
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ValidationError("unknown config key '" + where + key + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, T& out)
{
    if (const auto it = j.find(key); it != j.end()) out = it->get<T>();
}

} // namespace

OptimConfig config_from_json(const json& j, OptimConfig cfg)
{
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    try {
        reject_unknown(j, {"maxIters", "learningRates", "weights", "adam", "noise", "convergence", "checkpoint_every"}, "");
        read(j, "maxIters", cfg.max_iters);
        read(j, "checkpoint_every", cfg.checkpoint_every);
        if (const auto it = j.find("learningRates"); it != j.end()) {
            reject_unknown(*it, {"jacobian", "axisAngle", "translation"}, "learningRates.");
            read(*it, "jacobian", cfg.learning_rates.jacobian);
            read(*it, "axisAngle", cfg.learning_rates.axis_angle);
            read(*it, "translation", cfg.learning_rates.translation);
        }
        if (const auto it = j.find("weights"); it != j.end()) {
            reject_unknown(*it, {"guidance", "flex", "rig", "temp"}, "weights.");
            read(*it, "guidance", cfg.weights.guidance);
            read(*it, "flex", cfg.weights.flex);
            read(*it, "rig", cfg.weights.rig);
            read(*it, "temp", cfg.weights.temp);
        }
        if (const auto it = j.find("adam"); it != j.end()) {
            reject_unknown(*it, {"beta1", "beta2", "eps"}, "adam.");
            read(*it, "beta1", cfg.adam.beta1);
            read(*it, "beta2", cfg.adam.beta2);
            read(*it, "eps", cfg.adam.eps);
        }
        if (const auto it = j.find("noise"); it != j.end()) {
            reject_unknown(*it, {"sigma", "seed"}, "noise.");
            read(*it, "sigma", cfg.noise.sigma);
            read(*it, "seed", cfg.noise.seed);
        }
        if (const auto it = j.find("convergence"); it != j.end()) {
            reject_unknown(*it, {"relTol", "window"}, "convergence.");
            read(*it, "relTol", cfg.convergence.rel_tol);
            read(*it, "window", cfg.convergence.window);
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

json config_to_json(const OptimConfig& cfg)
{
    return {
        {"maxIters", cfg.max_iters},
        {"learningRates",
         {{"jacobian", cfg.learning_rates.jacobian},
          {"axisAngle", cfg.learning_rates.axis_angle},
          {"translation", cfg.learning_rates.translation}}},
        {"weights",
         {{"guidance", cfg.weights.guidance},
          {"flex", cfg.weights.flex},
          {"rig", cfg.weights.rig},
          {"temp", cfg.weights.temp}}},
        {"adam", {{"beta1", cfg.adam.beta1}, {"beta2", cfg.adam.beta2}, {"eps", cfg.adam.eps}}},
        {"noise", {{"sigma", cfg.noise.sigma}, {"seed", cfg.noise.seed}}},
        {"convergence", {{"relTol", cfg.convergence.rel_tol}, {"window", cfg.convergence.window}}},
        {"checkpoint_every", cfg.checkpoint_every},
    };
}

json report_to_json(const OptimReport& report)
{
    json iters = json::array();
    for (const auto& r : report.per_iteration) {
        iters.push_back({
            {"iter", r.iter},
            {"total", r.total},
            {"guidance", r.guidance},
            {"flex", r.flex},
            {"rig", r.rig},
            {"temp", r.temp},
        });
    }
    return {
        {"perIteration", std::move(iters)},
        {"converged", report.converged},
        {"diverged", report.diverged},
        {"wallTime", report.wall_time},
    };
}

void save_motion(const std::filesystem::path& dir, const std::string& stem, const MotionSequence& motion)
{
    json frames = json::array();
    for (std::size_t i = 0; i < motion.frames.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "%s_deltaJ_%04zu.jac", stem.c_str(), i);
        save_jacobians(dir / name, motion.frames[i].delta_j);
        const auto& w = motion.frames[i].rigid.axis_angle;
        const auto& t = motion.frames[i].rigid.translation;
        frames.push_back({
            {"axisAngle", {w.x(), w.y(), w.z()}},
            {"translation", {t.x(), t.y(), t.z()}},
            {"deltaJ", name},
        });
    }
    const json doc = {
        {"format", "jacfield-motion"},
        {"version", 1},
        {"staticMeshRef", motion.static_mesh_ref},
        {"faces", motion.frames.empty() ? 0 : motion.frames.front().delta_j.size()},
        {"frames", std::move(frames)},
    };
    // Write then rename so a crash never leaves a truncated checkpoint behind.
    const auto final_path = dir / (stem + ".json");
    const auto tmp_path = dir / (stem + ".json.tmp");
    {
        std::ofstream out(tmp_path, std::ios::binary);
        if (!out) throw Error("cannot write " + tmp_path.string());
        out << doc.dump(2) << '\n';
    }
    std::filesystem::rename(tmp_path, final_path);
}

MotionSequence load_motion(const std::filesystem::path& json_path)
{
    std::ifstream in(json_path);
    if (!in) throw Error("cannot open " + json_path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(0, std::string("motion checkpoint: ") + e.what());
    }
    if (doc.value("format", "") != "jacfield-motion" || doc.value("version", 0) != 1) {
        throw ParseError(0, "motion checkpoint: unexpected format header");
    }
    MotionSequence motion;
    try {
        motion.static_mesh_ref = doc.value("staticMeshRef", std::uint64_t{0});
        const auto faces = doc.at("faces").get<std::size_t>();
        for (const auto& f : doc.at("frames")) {
            MotionFrame frame;
            const auto w = f.at("axisAngle").get<std::vector<double>>();
            const auto t = f.at("translation").get<std::vector<double>>();
            if (w.size() != 3 || t.size() != 3) {
                throw ValidationError("motion checkpoint: rigid parameters must be 3-vectors");
            }
            frame.rigid.axis_angle = Eigen::Vector3d(w[0], w[1], w[2]);
            frame.rigid.translation = Eigen::Vector3d(t[0], t[1], t[2]);
            frame.delta_j = load_jacobians(json_path.parent_path() / f.at("deltaJ").get<std::string>());
            if (frame.delta_j.size() != faces) throw ValidationError("motion checkpoint: deltaJ face count mismatch");
            motion.frames.push_back(std::move(frame));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("motion checkpoint: ") + e.what());
    }
    return motion;
}

} // namespace jacfield
