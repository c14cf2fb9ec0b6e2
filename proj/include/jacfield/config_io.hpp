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

#include <jacfield/motion.hpp>
#include <jacfield/optimizer.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>

namespace jacfield {

/// Overlay the keys present in `j` onto `base`. Unknown keys are rejected.
OptimConfig config_from_json(const nlohmann::json& j, OptimConfig base);
nlohmann::json config_to_json(const OptimConfig& cfg);

nlohmann::json report_to_json(const OptimReport& report);

///
/// Motion checkpoint: `<dir>/<stem>.json` with per-frame rigid parameters, plus one binary
/// JacobianField blob per frame named `<stem>_deltaJ_####.jac`.
///
void save_motion(const std::filesystem::path& dir, const std::string& stem, const MotionSequence& motion);
MotionSequence load_motion(const std::filesystem::path& json_path);

} // namespace jacfield
