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

#include <jacfield/config_io.hpp>
#include <jacfield/error.hpp>
#include <jacfield/jacobian_field.hpp>
#include <jacfield/presets.hpp>

#include <doctest.h>

#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace jacfield;
using nlohmann::json;

namespace {

std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("jacfield_io_" + std::to_string(::getpid()) + "_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

JacobianField random_field(std::mt19937_64& rng, std::size_t m)
{
    JacobianField f(m);
    for (auto& j : f) j = test::random_matrix(rng, 10.0);
    return f;
}

} // namespace

TEST_CASE("JacobianField serialization")
{
    std::mt19937_64 rng(77);
    const JacobianField field = random_field(rng, 13);

    SUBCASE("binary layout")
    {
        std::stringstream buf;
        write_jacobians_binary(buf, field);
        const std::string bytes = buf.str();
        CHECK(bytes.size() == 4 + 4 + 8 + 13 * 9 * 8);
        CHECK(bytes.substr(0, 4) == "JACF");
        double first = 0.0;
        std::memcpy(&first, bytes.data() + 16, 8);
        CHECK(first == field[0](0, 0));
        double second = 0.0;
        std::memcpy(&second, bytes.data() + 24, 8);
        CHECK(second == field[0](0, 1));
        CHECK(read_jacobians_binary(buf) == field);
    }
    SUBCASE("json layout")
    {
        std::stringstream buf;
        write_jacobians_json(buf, field);
        const json doc = json::parse(buf.str());
        CHECK(doc["format"] == "jacfield");
        CHECK(doc["faces"] == 13);
        CHECK(doc["matrices"][2][5].get<double>() == field[2](1, 2));
        buf.seekg(0);
        CHECK(read_jacobians_json(buf) == field);
    }
    SUBCASE("files pick the layout by extension and content")
    {
        const auto dir = scratch_dir("jac");
        save_jacobians(dir / "a.jac", field);
        save_jacobians(dir / "a.json", field);
        CHECK(load_jacobians(dir / "a.jac") == field);
        CHECK(load_jacobians(dir / "a.json") == field);
        CHECK_THROWS_AS(load_jacobians(dir / "missing.jac"), Error);
        std::filesystem::remove_all(dir);
    }
    SUBCASE("corrupt input")
    {
        std::stringstream buf;
        write_jacobians_binary(buf, field);
        std::string bytes = buf.str();
        std::stringstream truncated(bytes.substr(0, bytes.size() - 5));
        CHECK_THROWS_AS(read_jacobians_binary(truncated), ParseError);
        std::string wrong = bytes;
        wrong[0] = 'X';
        std::stringstream bad_magic(wrong);
        CHECK_THROWS_AS(read_jacobians_binary(bad_magic), ParseError);
        std::stringstream bad_json(R"({"format":"jacfield","version":1,"faces":2,"matrices":[[1,0,0,0,1,0,0,0,1]]})");
        CHECK_THROWS_AS(read_jacobians_json(bad_json), ValidationError);
    }
}

TEST_CASE("config JSON")
{
    SUBCASE("round trip of every field")
    {
        OptimConfig cfg;
        cfg.max_iters = 17;
        cfg.learning_rates = {0.1, 0.2, 0.3};
        cfg.weights = {2.0, 0.0, 3.0, 0.25};
        cfg.adam = {0.8, 0.99, 1e-6};
        cfg.noise = {0.5, 42};
        cfg.convergence = {1e-4, 7};
        cfg.checkpoint_every = 9;
        const OptimConfig back = config_from_json(config_to_json(cfg), OptimConfig{});
        CHECK(config_to_json(back) == config_to_json(cfg));
    }
    SUBCASE("partial overlay keeps the base")
    {
        const OptimConfig base = OptimConfig::static_defaults();
        const OptimConfig cfg = config_from_json(json::parse(R"({"weights":{"rig":4}})"), base);
        CHECK(cfg.weights.rig == 4.0);
        CHECK(cfg.weights.flex == base.weights.flex);
        CHECK(cfg.max_iters == 2000);
    }
    SUBCASE("rejections")
    {
        CHECK_THROWS_WITH_AS(
            config_from_json(json::parse(R"({"weights":{"rigidity":1}})"), {}), doctest::Contains("weights.rigidity"),
            ValidationError);
        CHECK_THROWS_AS(config_from_json(json::parse(R"({"maxIters":"many"})"), {}), ValidationError);
        CHECK_THROWS_AS(config_from_json(json::parse(R"({"adam":{"beta1":1.5}})"), {}), ValidationError);
        CHECK_THROWS_AS(config_from_json(json::parse("[1,2]"), {}), ValidationError);
    }
    SUBCASE("report")
    {
        OptimReport r;
        r.per_iteration.push_back({0, 1.5, 1.0, 0.5, 0.0, 0.0});
        r.converged = true;
        const json j = report_to_json(r);
        CHECK(j["perIteration"][0]["total"] == 1.5);
        CHECK(j["converged"] == true);
        CHECK(j.contains("wallTime"));
    }
}

TEST_CASE("motion checkpoints")
{
    std::mt19937_64 rng(78);
    MotionSequence motion = MotionSequence::at_rest(3, 5, 0xfeedbeefcafe1234ull);
    for (auto& f : motion.frames) {
        f.delta_j = random_field(rng, 5);
        f.rigid.axis_angle = Eigen::Vector3d::Random();
        f.rigid.translation = Eigen::Vector3d::Random();
    }
    const auto dir = scratch_dir("motion");
    save_motion(dir, "motion", motion);
    CHECK(std::filesystem::exists(dir / "motion_deltaJ_0002.jac"));
    CHECK_FALSE(std::filesystem::exists(dir / "motion.json.tmp"));
    const json doc = json::parse(std::ifstream(dir / "motion.json"));
    CHECK(doc["format"] == "jacfield-motion");
    CHECK(doc["version"] == 1);

    const MotionSequence back = load_motion(dir / "motion.json");
    CHECK(back.static_mesh_ref == motion.static_mesh_ref);
    CHECK(back.frames == motion.frames);

    std::ofstream(dir / "broken.json") << R"({"format":"jacfield-motion","version":1,"frames":[]})";
    CHECK_THROWS_AS(load_motion(dir / "broken.json"), ParseError);
    std::ofstream(dir / "other.json") << R"({"format":"something-else","version":1})";
    CHECK_THROWS_AS(load_motion(dir / "other.json"), ParseError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("procedural presets")
{
    const TriMesh flag = make_grid(6, 4, 1.5, 1.0);
    const Vertices& rest = flag.vertices();
    const double diag = bbox_diagonal(rest);

    const auto path = translate_line_path(rest, 5);
    REQUIRE(path.size() == 5);
    CHECK(path.front().isZero(0));
    CHECK((path.back() - Eigen::Vector3d(0.5, 0.25, 0.0) * diag).norm() < 1e-12);
    for (std::size_t i = 1; i + 1 < path.size(); ++i) {
        CHECK((path[i] - 0.5 * (path[i - 1] + path[i + 1])).norm() < 1e-12);
    }
    const auto line = translate_line_targets(rest, 5);
    CHECK(((line[3].rowwise() - path[3].transpose()) - rest).cwiseAbs().maxCoeff() < 1e-12);

    const auto wave = flag_wave_targets(rest, 4);
    REQUIRE(wave.size() == 4);
    for (const auto& w : wave) {
        CHECK(w.leftCols(2) == rest.leftCols(2));
        for (Eigen::Index r = 0; r < rest.rows(); ++r) {
            if (rest(r, 0) == rest.col(0).minCoeff()) CHECK(w(r, 2) == rest(r, 2));
        }
        CHECK((w.col(2) - rest.col(2)).cwiseAbs().maxCoeff() <= 0.08 * diag + 1e-12);
    }
    CHECK((wave[0] - wave[1]).norm() > 0.0);

    CHECK(preset_targets("flag-wave", rest, 4)[2] == wave[2]);
    CHECK_THROWS_WITH_AS(preset_targets("spin", rest, 4), doctest::Contains("unknown preset"), ValidationError);
}
