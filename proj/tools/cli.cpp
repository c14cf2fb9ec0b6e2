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

#include "cli.hpp"

#include <jacfield/config_io.hpp>
#include <jacfield/error.hpp>
#include <jacfield/obj_io.hpp>
#include <jacfield/optimizer.hpp>
#include <jacfield/presets.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <fcntl.h>
#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace jacfield::cli {

namespace {

std::string sha256_hex(const std::string& bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

int thread_count()
{
    if (const char* env = std::getenv("JACFIELD_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

OptimConfig resolve_config(const std::string& path, OptimConfig base)
{
    if (path.empty()) return base;
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error("config file " + path + " is not valid JSON: " + e.what());
    }
    return config_from_json(j, base);
}

/// Holds `run.lock` inside the output directory for the lifetime of a command.
class OutputLock
{
public:
    explicit OutputLock(const fs::path& dir)
        : m_path(dir / "run.lock")
    {
        fs::create_directories(dir);
        m_fd = ::open(m_path.c_str(), O_CREAT | O_EXCL | O_WRONLY | O_CLOEXEC, 0644);
        if (m_fd < 0) throw Error("output directory " + dir.string() + " is locked by another run (run.lock exists)");
    }
    ~OutputLock()
    {
        ::close(m_fd);
        std::error_code ec;
        fs::remove(m_path, ec);
    }
    OutputLock(const OutputLock&) = delete;
    OutputLock& operator=(const OutputLock&) = delete;

private:
    fs::path m_path;
    int m_fd = -1;
};

void write_manifest(
    const fs::path& out_dir,
    const std::string& command,
    const OptimConfig& cfg,
    const std::string& input_mesh,
    const std::vector<std::string>& frames,
    const OptimReport& report)
{
    const json resolved = config_to_json(cfg);
    const json manifest = {
        {"schema", "jacfield-manifest"},
        {"schemaVersion", 1},
        {"command", command},
        {"toolVersion", kToolVersion},
        {"config", resolved},
        {"configHash", sha256_hex(resolved.dump())},
        {"inputMesh", input_mesh},
        {"frames", frames},
        {"report", report_to_json(report)},
    };
    std::ofstream out(out_dir / "manifest.json", std::ios::binary);
    if (!out) throw Error("cannot write manifest.json");
    out << manifest.dump(2) << '\n';
}

struct GuidanceStack
{
    std::unique_ptr<Guidance> base;
    std::unique_ptr<ProcessChannel> channel;
    std::unique_ptr<NoisyGuidance> noisy;

    Guidance& top() { return noisy ? static_cast<Guidance&>(*noisy) : *base; }

    void add_noise(const NoiseConfig& noise)
    {
        if (noise.sigma > 0) noisy = std::make_unique<NoisyGuidance>(*base, noise.sigma, noise.seed);
    }
};

void attach_channel(GuidanceStack& stack, const std::string& command)
{
    stack.channel = std::make_unique<ProcessChannel>(command);
    stack.base = std::make_unique<ChannelGuidance>(*stack.channel);
}

std::string frame_name(std::size_t i)
{
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04zu.obj", i);
    return name;
}

// ---------------------------------------------------------------------------

struct FitArgs
{
    std::string mesh;
    std::string target;
    std::string guidance_cmd;
    std::string config;
    std::string out;
};

int cmd_fit(const FitArgs& args, std::ostream& out)
{
    const TriMesh mesh = load_obj(fs::path(args.mesh));
    const OptimConfig cfg = resolve_config(args.config, OptimConfig::static_defaults());

    GuidanceStack guidance;
    if (!args.target.empty()) {
        const TriMesh target = load_obj(fs::path(args.target));
        if (target.num_vertices() != mesh.num_vertices()) {
            throw ValidationError(
                "target " + args.target + " has " + std::to_string(target.num_vertices()) + " vertices, mesh has " +
                std::to_string(mesh.num_vertices()));
        }
        guidance.base = std::make_unique<TargetGuidance>(std::vector<Vertices>{target.vertices()});
    } else {
        attach_channel(guidance, args.guidance_cmd);
    }
    guidance.add_noise(cfg.noise);

    const fs::path out_dir(args.out);
    OutputLock lock(out_dir);
    const StaticResult result = optimize_static(mesh, guidance.top(), cfg);

    save_obj(out_dir / "static.obj", mesh, result.static_vertices);
    save_jacobians(out_dir / "static.jac", result.jacobians);
    write_manifest(out_dir, "fit", cfg, args.mesh, {"static.obj"}, result.report);

    out << "fit: " << result.report.per_iteration.size() << " iterations, "
        << (result.report.converged ? "converged" : "iteration budget exhausted") << '\n';
    if (result.report.diverged) throw OptimError("optimization diverged (loss exceeded 1e6 x initial)");
    return result.report.converged ? kConverged : kBudgetExhausted;
}

struct AnimateArgs
{
    std::string static_mesh;
    int frames = 0;
    std::string targets;
    std::string guidance_cmd;
    std::string preset;
    std::string config;
    std::string out;
};

std::vector<Vertices> load_target_dir(const fs::path& dir, const TriMesh& mesh, int num_frames)
{
    if (!fs::is_directory(dir)) throw Error("targets directory " + dir.string() + " does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".obj") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (static_cast<int>(files.size()) != num_frames) {
        throw ValidationError(
            "expected " + std::to_string(num_frames) + " targets, found " + std::to_string(files.size()) + " in " +
            dir.string());
    }
    std::vector<Vertices> targets;
    for (const auto& f : files) {
        const TriMesh t = load_obj(f);
        if (t.num_vertices() != mesh.num_vertices()) {
            throw ValidationError("target " + f.string() + " has a different vertex count than the static mesh");
        }
        targets.push_back(t.vertices());
    }
    return targets;
}

int cmd_animate(const AnimateArgs& args, std::ostream& out)
{
    const TriMesh mesh = load_obj(fs::path(args.static_mesh));
    const OptimConfig cfg = resolve_config(args.config, OptimConfig::dynamic_defaults());
    if (args.frames < 1) throw ValidationError("--frames must be >= 1");

    GuidanceStack guidance;
    if (!args.targets.empty()) {
        guidance.base = std::make_unique<TargetGuidance>(load_target_dir(args.targets, mesh, args.frames));
    } else if (!args.preset.empty()) {
        guidance.base = std::make_unique<TargetGuidance>(preset_targets(args.preset, mesh.vertices(), args.frames));
    } else {
        attach_channel(guidance, args.guidance_cmd);
    }
    guidance.add_noise(cfg.noise);

    const fs::path out_dir(args.out);
    OutputLock lock(out_dir);
    RunOptions options;
    options.threads = thread_count();
    options.on_checkpoint = [&](int, const MotionSequence& motion) { save_motion(out_dir, "motion", motion); };

    const DynamicResult result = optimize_dynamic(mesh, guidance.top(), cfg, args.frames, options);

    std::vector<std::string> names;
    for (std::size_t i = 0; i < result.frames.size(); ++i) {
        names.push_back(frame_name(i));
        save_obj(out_dir / names.back(), mesh, result.frames[i]);
    }
    save_motion(out_dir, "motion", result.motion);
    write_manifest(out_dir, "animate", cfg, args.static_mesh, names, result.report);

    out << "animate: " << result.report.per_iteration.size() << " iterations, "
        << (result.report.converged ? "converged" : "iteration budget exhausted") << '\n';
    if (result.report.diverged) throw OptimError("optimization diverged (loss exceeded 1e6 x initial)");
    return result.report.converged ? kConverged : kBudgetExhausted;
}

// ---------------------------------------------------------------------------

int cmd_validate(const std::string& path, std::ostream& out)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open mesh file " + path);
    std::vector<ObjIssue> issues;
    const RawObj raw = parse_obj_lenient(in, issues);

    json errors = json::array();
    for (const auto& issue : issues) errors.push_back({{"line", issue.line}, {"message", issue.message}});

    const int n = static_cast<int>(raw.positions.size());
    Vertices vertices(n, 3);
    for (int i = 0; i < n; ++i) vertices.row(i) = raw.positions[static_cast<std::size_t>(i)].transpose();

    std::vector<Eigen::Vector3i> usable;
    json degenerate = json::array();
    double min_area = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < raw.faces.size(); ++f) {
        const Eigen::Vector3i& face = raw.faces[f];
        const auto bad = std::find_if(face.data(), face.data() + 3, [&](int v) { return v < 0 || v >= n; });
        if (bad != face.data() + 3) {
            errors.push_back({{"line", raw.face_lines[f]},
                              {"message", "face " + std::to_string(f) + " references vertex " + std::to_string(*bad) +
                                              " of " + std::to_string(n)}});
            continue;
        }
        usable.push_back(face);
        const double area = (face[0] == face[1] || face[1] == face[2] || face[0] == face[2])
                                ? 0.0
                                : face_area(vertices, face);
        min_area = std::min(min_area, area);
        if (!(area > kAreaFloor)) {
            degenerate.push_back(f);
            errors.push_back({{"line", raw.face_lines[f]},
                              {"message", "face " + std::to_string(f) + " is degenerate (area " +
                                              std::to_string(area) + ")"}});
        }
    }
    Faces faces(static_cast<Eigen::Index>(usable.size()), 3);
    for (std::size_t f = 0; f < usable.size(); ++f) faces.row(static_cast<Eigen::Index>(f)) = usable[f].transpose();

    const EdgeCounts edges = count_edges(faces);
    const int components = count_components(n, faces);
    const bool valid = errors.empty() && edges.non_manifold == 0 && components == 1 && !raw.faces.empty();

    const json report = {
        {"vertices", n},
        {"faces", raw.faces.size()},
        {"boundaryEdges", edges.boundary},
        {"nonManifoldEdges", edges.non_manifold},
        {"minFaceArea", usable.empty() ? json(nullptr) : json(min_area)},
        {"components", components},
        {"degenerateFaces", degenerate},
        {"errors", errors},
        {"valid", valid},
    };
    out << report.dump(2) << '\n';
    return valid ? kConverged : kValidationFailed;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Jacobian-field mesh deformation: static fitting and 4D animation"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "fit a static shape by optimizing per-face Jacobians");
    fit_cmd->add_option("--mesh", fit.mesh, "initial mesh (OBJ)")->required();
    auto* fit_target = fit_cmd->add_option("--target", fit.target, "target mesh with the same connectivity (OBJ)");
    auto* fit_guid = fit_cmd->add_option("--guidance-cmd", fit.guidance_cmd, "external guidance peer command");
    fit_target->excludes(fit_guid);
    fit_cmd->add_option("--config", fit.config, "optimizer config (JSON)");
    fit_cmd->add_option("--out", fit.out, "output directory")->required();

    AnimateArgs anim;
    auto* anim_cmd = app.add_subcommand("animate", "optimize per-frame delta Jacobians and rigid motions");
    anim_cmd->add_option("--static", anim.static_mesh, "static mesh (OBJ)")->required();
    anim_cmd->add_option("--frames", anim.frames, "number of frames L")->required();
    auto* a_targets = anim_cmd->add_option("--targets", anim.targets, "directory holding L target OBJs");
    auto* a_guid = anim_cmd->add_option("--guidance-cmd", anim.guidance_cmd, "external guidance peer command");
    auto* a_preset = anim_cmd->add_option("--preset", anim.preset, "procedural targets: translate-line | flag-wave");
    a_targets->excludes(a_guid)->excludes(a_preset);
    a_guid->excludes(a_preset);
    anim_cmd->add_option("--config", anim.config, "optimizer config (JSON)");
    anim_cmd->add_option("--out", anim.out, "output directory")->required();

    std::string validate_mesh;
    auto* val_cmd = app.add_subcommand("validate", "check a mesh against every structural invariant");
    val_cmd->add_option("--mesh", validate_mesh, "mesh (OBJ)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kConverged;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << '\n';
        return kConverged;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kError;
    }

    try {
        if (*fit_cmd) {
            if (fit.target.empty() && fit.guidance_cmd.empty()) {
                err << "error: fit needs --target or --guidance-cmd\n";
                return kError;
            }
            return cmd_fit(fit, out);
        }
        if (*anim_cmd) {
            if (anim.targets.empty() && anim.guidance_cmd.empty() && anim.preset.empty()) {
                err << "error: animate needs one of --targets, --guidance-cmd, --preset\n";
                return kError;
            }
            return cmd_animate(anim, out);
        }
        return cmd_validate(validate_mesh, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kError;
    }
}

} // namespace jacfield::cli
