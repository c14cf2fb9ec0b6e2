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

#include <jacfield/log.hpp>

#include <iostream>
#include <mutex>
#include <utility>

namespace jacfield {

namespace {

std::mutex g_sink_mutex;
WarningSink g_sink;

} // namespace

WarningSink set_warning_sink(WarningSink sink)
{
    std::lock_guard lock(g_sink_mutex);
    return std::exchange(g_sink, std::move(sink));
}

void warn(std::string_view message)
{
    std::lock_guard lock(g_sink_mutex);
    if (g_sink) {
        g_sink(message);
    } else {
        std::cerr << "warning: " << message << '\n';
    }
}

} // namespace jacfield
