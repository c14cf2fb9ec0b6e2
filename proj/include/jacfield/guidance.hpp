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

#include <jacfield/types.hpp>

#include <chrono>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace jacfield {

/// Per-frame vertex gradients from a guidance source. Score-distillation style sources
/// supply gradients only and leave `value` empty.
struct GuidanceOutput
{
    std::optional<double> value;
    std::vector<Vertices> grads;
};

/// Anything that scores a set of frames and returns d(score)/d(vertices) per frame.
class Guidance
{
public:
    virtual ~Guidance() = default;
    virtual GuidanceOutput evaluate(int iter, std::span<const Vertices> frames) = 0;
};

class ZeroGuidance final : public Guidance
{
public:
    GuidanceOutput evaluate(int iter, std::span<const Vertices> frames) override;
};

/// target_fit_energy against one target per frame.
class TargetGuidance final : public Guidance
{
public:
    explicit TargetGuidance(std::vector<Vertices> targets, std::vector<int> mask = {});
    GuidanceOutput evaluate(int iter, std::span<const Vertices> frames) override;

    const std::vector<Vertices>& targets() const { return m_targets; }

private:
    std::vector<Vertices> m_targets;
    std::vector<int> m_mask;
};

// ---------------------------------------------------------------------------
// Guidance wire protocol: one JSON object per line.
//   request {"type":"grad_request","iter":k,"frames":L,"verts":[[[x,y,z],...], ...]}
//   reply   {"type":"grad_reply","iter":k,"grads":[[[gx,gy,gz],...], ...]}
// ---------------------------------------------------------------------------

std::string encode_grad_request(int iter, std::span<const Vertices> frames);

/// Parse and check one reply line. Throws GuidanceError("malformed reply: ...") on a wrong
/// type, iter, frame count, row count, or non-finite entry.
std::vector<Vertices> decode_grad_reply(const std::string& line, int iter, int num_frames, int num_vertices);

/// Peer side helpers, used by guidance processes written in C++.
struct GradRequest
{
    int iter = 0;
    std::vector<Vertices> frames;
};
GradRequest decode_grad_request(const std::string& line);
std::string encode_grad_reply(int iter, std::span<const Vertices> grads);

/// Exclusive, synchronous transport to a guidance peer: one outstanding request.
class GuidanceChannel
{
public:
    virtual ~GuidanceChannel() = default;
    virtual std::vector<Vertices> exchange(int iter, std::span<const Vertices> frames) = 0;
};

inline constexpr std::chrono::milliseconds kDefaultGuidanceTimeout{120'000};

/// Newline-delimited JSON over a pair of file descriptors (pipe or socket). Does not own them.
class FdChannel : public GuidanceChannel
{
public:
    FdChannel(int read_fd, int write_fd, std::chrono::milliseconds timeout = kDefaultGuidanceTimeout);
    std::vector<Vertices> exchange(int iter, std::span<const Vertices> frames) override;

protected:
    void write_line(const std::string& line);
    std::string read_line();

private:
    int m_read_fd;
    int m_write_fd;
    std::chrono::milliseconds m_timeout;
    std::string m_buffer;
};

/// Launches `command` through /bin/sh and speaks the protocol over its stdin/stdout.
class ProcessChannel final : public GuidanceChannel
{
public:
    explicit ProcessChannel(const std::string& command, std::chrono::milliseconds timeout = kDefaultGuidanceTimeout);
    ~ProcessChannel() override;

    ProcessChannel(const ProcessChannel&) = delete;
    ProcessChannel& operator=(const ProcessChannel&) = delete;

    std::vector<Vertices> exchange(int iter, std::span<const Vertices> frames) override;

private:
    int m_pid = -1;
    int m_to_child = -1;
    int m_from_child = -1;
    std::unique_ptr<FdChannel> m_channel;
};

/// Guidance whose gradients come from an external peer; no value is reported.
class ChannelGuidance final : public Guidance
{
public:
    explicit ChannelGuidance(GuidanceChannel& channel)
        : m_channel(channel)
    {}
    GuidanceOutput evaluate(int iter, std::span<const Vertices> frames) override;

private:
    GuidanceChannel& m_channel;
};

} // namespace jacfield
