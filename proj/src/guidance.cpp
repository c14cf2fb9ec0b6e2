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
#include <jacfield/guidance.hpp>

#include <nlohmann/json.hpp>

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace jacfield {

using nlohmann::json;

GuidanceOutput ZeroGuidance::evaluate(int, std::span<const Vertices> frames)
{
    GuidanceOutput out;
    out.value = 0.0;
    for (const auto& f : frames) out.grads.push_back(Vertices::Zero(f.rows(), 3));
    return out;
}

TargetGuidance::TargetGuidance(std::vector<Vertices> targets, std::vector<int> mask)
    : m_targets(std::move(targets))
    , m_mask(std::move(mask))
{}

GuidanceOutput TargetGuidance::evaluate(int, std::span<const Vertices> frames)
{
    if (frames.size() != m_targets.size()) {
        throw ValidationError(
            "target guidance has " + std::to_string(m_targets.size()) + " targets for " +
            std::to_string(frames.size()) + " frames");
    }
    GuidanceOutput out;
    double value = 0.0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        auto e = target_fit_energy(frames[i], m_targets[i], m_mask);
        value += e.value;
        out.grads.push_back(std::move(e.grad_vertices.front()));
    }
    out.value = value;
    return out;
}

// ---------------------------------------------------------------------------
// Wire format
// ---------------------------------------------------------------------------

namespace {

json encode_frames(std::span<const Vertices> frames)
{
    json all = json::array();
    for (const auto& frame : frames) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < frame.rows(); ++r) {
            if (!frame.row(r).allFinite()) throw GuidanceError("refusing to send non-finite coordinates");
            rows.push_back(json::array({frame(r, 0), frame(r, 1), frame(r, 2)}));
        }
        all.push_back(std::move(rows));
    }
    return all;
}

[[noreturn]] void malformed(const std::string& why)
{
    throw GuidanceError("malformed reply: " + why);
}

Vertices decode_frame(const json& rows, int expected_rows, const char* what)
{
    if (!rows.is_array()) malformed(std::string(what) + " frame is not an array");
    if (expected_rows >= 0 && static_cast<int>(rows.size()) != expected_rows) {
        malformed(
            std::string(what) + " frame has " + std::to_string(rows.size()) + " rows, expected " +
            std::to_string(expected_rows));
    }
    Vertices out(static_cast<Eigen::Index>(rows.size()), 3);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (!row.is_array() || row.size() != 3) malformed("row " + std::to_string(r) + " is not a 3-vector");
        for (int k = 0; k < 3; ++k) {
            const auto& v = row[static_cast<std::size_t>(k)];
            if (!v.is_number()) malformed("row " + std::to_string(r) + " has a non-numeric entry");
            const double x = v.get<double>();
            if (!std::isfinite(x)) malformed("row " + std::to_string(r) + " has a non-finite entry");
            out(static_cast<Eigen::Index>(r), k) = x;
        }
    }
    return out;
}

} // namespace

std::string encode_grad_request(int iter, std::span<const Vertices> frames)
{
    const json doc = {
        {"type", "grad_request"},
        {"iter", iter},
        {"frames", frames.size()},
        {"verts", encode_frames(frames)},
    };
    return doc.dump();
}

std::vector<Vertices> decode_grad_reply(const std::string& line, int iter, int num_frames, int num_vertices)
{
    json doc;
    try {
        doc = json::parse(line);
    } catch (const json::exception&) {
        malformed("not valid JSON");
    }
    if (!doc.is_object() || doc.value("type", "") != "grad_reply") malformed("type is not grad_reply");
    if (!doc.contains("iter") || !doc["iter"].is_number_integer() || doc["iter"].get<int>() != iter) {
        malformed("iter does not match request " + std::to_string(iter));
    }
    const auto it = doc.find("grads");
    if (it == doc.end() || !it->is_array()) malformed("missing grads array");
    if (static_cast<int>(it->size()) != num_frames) {
        malformed("got " + std::to_string(it->size()) + " frames, expected " + std::to_string(num_frames));
    }
    std::vector<Vertices> grads;
    grads.reserve(it->size());
    for (const auto& frame : *it) grads.push_back(decode_frame(frame, num_vertices, "gradient"));
    return grads;
}

GradRequest decode_grad_request(const std::string& line)
{
    const json doc = json::parse(line);
    if (doc.value("type", "") != "grad_request") throw GuidanceError("not a grad_request");
    GradRequest req;
    req.iter = doc.at("iter").get<int>();
    const auto& verts = doc.at("verts");
    if (static_cast<int>(verts.size()) != doc.at("frames").get<int>()) throw GuidanceError("frame count mismatch");
    for (const auto& frame : verts) req.frames.push_back(decode_frame(frame, -1, "vertex"));
    return req;
}

std::string encode_grad_reply(int iter, std::span<const Vertices> grads)
{
    const json doc = {
        {"type", "grad_reply"},
        {"iter", iter},
        {"grads", encode_frames(grads)},
    };
    return doc.dump();
}

// ---------------------------------------------------------------------------
// Transports
// ---------------------------------------------------------------------------

FdChannel::FdChannel(int read_fd, int write_fd, std::chrono::milliseconds timeout)
    : m_read_fd(read_fd)
    , m_write_fd(write_fd)
    , m_timeout(timeout)
{}

void FdChannel::write_line(const std::string& line)
{
    std::string payload = line;
    payload.push_back('\n');
    std::size_t written = 0;
    while (written < payload.size()) {
        const ssize_t n = ::write(m_write_fd, payload.data() + written, payload.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw GuidanceError(std::string("guidance peer write failed: ") + std::strerror(errno));
        }
        written += static_cast<std::size_t>(n);
    }
}

std::string FdChannel::read_line()
{
    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + m_timeout;
    for (;;) {
        if (const auto nl = m_buffer.find('\n'); nl != std::string::npos) {
            std::string line = m_buffer.substr(0, nl);
            m_buffer.erase(0, nl + 1);
            return line;
        }
        const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
        if (remaining.count() <= 0) {
            throw GuidanceError(
                "guidance peer timed out after " + std::to_string(m_timeout.count() / 1000.0) + " s");
        }
        pollfd pfd{m_read_fd, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
        if (ready < 0) {
            if (errno == EINTR) continue;
            throw GuidanceError(std::string("guidance peer poll failed: ") + std::strerror(errno));
        }
        if (ready == 0) continue;
        char chunk[65536];
        const ssize_t n = ::read(m_read_fd, chunk, sizeof(chunk));
        if (n < 0) {
            if (errno == EINTR) continue;
            throw GuidanceError(std::string("guidance peer read failed: ") + std::strerror(errno));
        }
        if (n == 0) throw GuidanceError("guidance peer closed the channel");
        m_buffer.append(chunk, static_cast<std::size_t>(n));
    }
}

std::vector<Vertices> FdChannel::exchange(int iter, std::span<const Vertices> frames)
{
    write_line(encode_grad_request(iter, frames));
    const int rows = frames.empty() ? 0 : static_cast<int>(frames.front().rows());
    return decode_grad_reply(read_line(), iter, static_cast<int>(frames.size()), rows);
}

ProcessChannel::ProcessChannel(const std::string& command, std::chrono::milliseconds timeout)
{
    // A dead peer must surface as a write error, not kill this process.
    std::signal(SIGPIPE, SIG_IGN);

    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) throw GuidanceError("pipe failed");
    if (::pipe2(from_child, O_CLOEXEC) != 0) {
        ::close(to_child[0]);
        ::close(to_child[1]);
        throw GuidanceError("pipe failed");
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);

    // Own process group, so teardown also reaches anything the shell started.
    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);

    const char* argv[] = {"sh", "-c", command.c_str(), nullptr};
    pid_t pid = -1;
    const int rc = posix_spawn(&pid, "/bin/sh", &actions, &attr, const_cast<char* const*>(argv), environ);
    posix_spawn_file_actions_destroy(&actions);
    posix_spawnattr_destroy(&attr);
    ::close(to_child[0]);
    ::close(from_child[1]);
    if (rc != 0) {
        ::close(to_child[1]);
        ::close(from_child[0]);
        throw GuidanceError("could not launch guidance command '" + command + "': " + std::strerror(rc));
    }
    m_pid = pid;
    m_to_child = to_child[1];
    m_from_child = from_child[0];
    m_channel = std::make_unique<FdChannel>(m_from_child, m_to_child, timeout);
}

ProcessChannel::~ProcessChannel()
{
    if (m_to_child >= 0) ::close(m_to_child);
    if (m_pid > 0) {
        int status = 0;
        for (int i = 0; i < 200; ++i) {
            if (::waitpid(m_pid, &status, WNOHANG) != 0) {
                m_pid = -1;
                break;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        if (m_pid > 0) {
            ::kill(-m_pid, SIGKILL);
            ::waitpid(m_pid, &status, 0);
        }
    }
    if (m_from_child >= 0) ::close(m_from_child);
}

std::vector<Vertices> ProcessChannel::exchange(int iter, std::span<const Vertices> frames)
{
    return m_channel->exchange(iter, frames);
}

GuidanceOutput ChannelGuidance::evaluate(int iter, std::span<const Vertices> frames)
{
    GuidanceOutput out;
    out.grads = m_channel.exchange(iter, frames);
    return out;
}

} // namespace jacfield
