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

#include <stdexcept>
#include <string>

namespace jacfield {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based; 0 when not tied to a line.
class ParseError : public Error
{
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what)
        , m_line(line)
    {}

    std::size_t line() const { return m_line; }

private:
    std::size_t m_line;
};

/// Input violates a structural invariant (index range, degeneracy, shape).
class ValidationError : public Error
{
public:
    using Error::Error;
};

/// Poisson system could not be assembled or factorized.
class SolveError : public Error
{
public:
    using Error::Error;
};

/// External guidance peer failed, timed out or sent a malformed reply.
class GuidanceError : public Error
{
public:
    using Error::Error;
};

/// Optimizer received a non-finite gradient or diverged.
class OptimError : public Error
{
public:
    using Error::Error;
};

} // namespace jacfield
