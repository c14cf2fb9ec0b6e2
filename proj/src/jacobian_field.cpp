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

#include <jacfield/error.hpp>
#include <jacfield/jacobian_field.hpp>

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace jacfield {

static_assert(sizeof(Eigen::Matrix3d) == 9 * sizeof(double));
static_assert(std::endian::native == std::endian::little, "binary JacobianField I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'J', 'A', 'C', 'F'};
constexpr std::uint32_t kBinaryVersion = 1;

template <typename T>
void put(std::ostream& out, const T& value)
{
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in)
{
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
        throw ParseError(0, "truncated JacobianField blob");
    }
    return value;
}

} // namespace

bool JacobianField::all_finite() const
{
    return flat().allFinite();
}

Eigen::Map<Eigen::VectorXd> JacobianField::flat()
{
    return {m_matrices.empty() ? nullptr : m_matrices.front().data(), static_cast<Eigen::Index>(9 * m_matrices.size())};
}

Eigen::Map<const Eigen::VectorXd> JacobianField::flat() const
{
    return {m_matrices.empty() ? nullptr : m_matrices.front().data(), static_cast<Eigen::Index>(9 * m_matrices.size())};
}

JacobianField& JacobianField::operator+=(const JacobianField& other)
{
    if (other.size() != size()) throw ValidationError("JacobianField size mismatch");
    for (std::size_t j = 0; j < size(); ++j) m_matrices[j] += other.m_matrices[j];
    return *this;
}

JacobianField& JacobianField::operator*=(double s)
{
    for (auto& m : m_matrices) m *= s;
    return *this;
}

void write_jacobians_binary(std::ostream& out, const JacobianField& field)
{
    out.write(kMagic, sizeof(kMagic));
    put(out, kBinaryVersion);
    put(out, static_cast<std::uint64_t>(field.size()));
    for (const auto& m : field) {
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) put(out, m(r, c));
        }
    }
    if (!out) throw Error("failed writing JacobianField");
}

JacobianField read_jacobians_binary(std::istream& in)
{
    char magic[4];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
        throw ParseError(0, "not a JacobianField blob");
    }
    const auto version = get<std::uint32_t>(in);
    if (version != kBinaryVersion) throw ParseError(0, "unsupported JacobianField version " + std::to_string(version));
    const auto count = get<std::uint64_t>(in);
    JacobianField field(static_cast<std::size_t>(count));
    for (auto& m : field) {
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) m(r, c) = get<double>(in);
        }
    }
    if (!field.all_finite()) throw ValidationError("JacobianField contains non-finite entries");
    return field;
}

void write_jacobians_json(std::ostream& out, const JacobianField& field)
{
    nlohmann::json mats = nlohmann::json::array();
    for (const auto& m : field) {
        nlohmann::json row = nlohmann::json::array();
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) row.push_back(m(r, c));
        }
        mats.push_back(std::move(row));
    }
    const nlohmann::json doc = {
        {"format", "jacfield"},
        {"version", 1},
        {"faces", field.size()},
        {"matrices", std::move(mats)},
    };
    out << doc.dump() << '\n';
}

JacobianField read_jacobians_json(std::istream& in)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("JacobianField JSON: ") + e.what());
    }
    if (doc.value("format", "") != "jacfield" || doc.value("version", 0) != 1) {
        throw ParseError(0, "JacobianField JSON: unexpected format header");
    }
    const auto& mats = doc.at("matrices");
    const auto faces = doc.at("faces").get<std::size_t>();
    if (mats.size() != faces) throw ValidationError("JacobianField JSON: face count header does not match data");
    JacobianField field(faces);
    for (std::size_t j = 0; j < faces; ++j) {
        const auto& row = mats[j];
        if (row.size() != 9) throw ValidationError("JacobianField JSON: matrix " + std::to_string(j) + " is not 3x3");
        for (int k = 0; k < 9; ++k) field[j](k / 3, k % 3) = row[static_cast<std::size_t>(k)].get<double>();
    }
    if (!field.all_finite()) throw ValidationError("JacobianField contains non-finite entries");
    return field;
}

void save_jacobians(const std::filesystem::path& path, const JacobianField& field)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    if (path.extension() == ".json") {
        write_jacobians_json(out, field);
    } else {
        write_jacobians_binary(out, field);
    }
}

JacobianField load_jacobians(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    if (in.peek() == kMagic[0]) return read_jacobians_binary(in);
    return read_jacobians_json(in);
}

} // namespace jacfield
