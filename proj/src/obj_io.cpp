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
#include <jacfield/log.hpp>
#include <jacfield/obj_io.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

namespace jacfield {

namespace {

std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) tokens.push_back(line.substr(i, j - i));
        i = j;
    }
    return tokens;
}

double parse_double(std::string_view token, std::size_t line)
{
    double value = 0.0;
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ParseError(line, "invalid number '" + std::string(token) + "'");
    }
    return value;
}

int parse_index(std::string_view token, std::size_t count, std::size_t line)
{
    long value = 0;
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ParseError(line, "invalid index '" + std::string(token) + "'");
    }
    if (value == 0) {
        throw ParseError(line, "OBJ indices are 1-based; got 0");
    }
    // Negative indices count back from the most recent element.
    return static_cast<int>(value > 0 ? value - 1 : static_cast<long>(count) + value);
}

struct Corner
{
    int v;
    int vt;
};

Corner parse_corner(std::string_view token, const RawObj& obj, std::size_t line)
{
    const auto slash = token.find('/');
    Corner c{parse_index(token.substr(0, slash), obj.positions.size(), line), -1};
    if (slash != std::string_view::npos) {
        const auto rest = token.substr(slash + 1);
        const auto slash2 = rest.find('/');
        const auto vt = rest.substr(0, slash2);
        if (!vt.empty()) c.vt = parse_index(vt, obj.uvs.size(), line);
    }
    return c;
}

class ObjReader
{
public:
    explicit ObjReader(std::vector<ObjIssue>* issues)
        : m_issues(issues)
    {}

    RawObj read(std::istream& in)
    {
        std::string text;
        std::size_t line_no = 0;
        while (std::getline(in, text)) {
            ++line_no;
            try {
                parse_line(text, line_no);
            } catch (const ParseError& e) {
                if (!m_issues) throw;
                m_issues->push_back({e.line(), e.what()});
            }
        }
        return std::move(m_obj);
    }

private:
    void parse_line(std::string_view line, std::size_t line_no)
    {
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto tokens = split_ws(line);
        if (tokens.empty()) return;
        const auto kind = tokens[0];
        if (kind == "v") {
            if (tokens.size() < 4) throw ParseError(line_no, "vertex record needs 3 coordinates");
            m_obj.positions.emplace_back(
                parse_double(tokens[1], line_no),
                parse_double(tokens[2], line_no),
                parse_double(tokens[3], line_no));
        } else if (kind == "vt") {
            if (tokens.size() < 2) throw ParseError(line_no, "texture record needs at least 1 coordinate");
            const double u = parse_double(tokens[1], line_no);
            const double v = tokens.size() > 2 ? parse_double(tokens[2], line_no) : 0.0;
            m_obj.uvs.emplace_back(u, v);
        } else if (kind == "f") {
            if (tokens.size() < 4) throw ParseError(line_no, "face record needs at least 3 vertices");
            std::vector<Corner> corners;
            for (std::size_t i = 1; i < tokens.size(); ++i) {
                corners.push_back(parse_corner(tokens[i], m_obj, line_no));
            }
            for (std::size_t i = 1; i + 1 < corners.size(); ++i) {
                const Corner& a = corners[0];
                const Corner& b = corners[i];
                const Corner& c = corners[i + 1];
                m_obj.faces.emplace_back(a.v, b.v, c.v);
                m_obj.face_uvs.emplace_back(a.vt, b.vt, c.vt);
                m_obj.face_lines.push_back(line_no);
            }
        } else if (m_warned.insert(std::string(kind)).second) {
            warn("ignoring OBJ record '" + std::string(kind) + "' (first seen on line " + std::to_string(line_no) + ")");
        }
    }

    RawObj m_obj;
    std::vector<ObjIssue>* m_issues;
    std::set<std::string> m_warned;
};

void write_number(std::ostream& out, double value)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out << buf;
}

} // namespace

RawObj parse_obj(std::istream& in)
{
    return ObjReader(nullptr).read(in);
}

RawObj parse_obj_lenient(std::istream& in, std::vector<ObjIssue>& issues)
{
    return ObjReader(&issues).read(in);
}

TriMesh to_mesh(const RawObj& raw)
{
    Vertices vertices(static_cast<Eigen::Index>(raw.positions.size()), 3);
    for (std::size_t i = 0; i < raw.positions.size(); ++i) {
        vertices.row(static_cast<Eigen::Index>(i)) = raw.positions[i].transpose();
    }
    Faces faces(static_cast<Eigen::Index>(raw.faces.size()), 3);
    for (std::size_t i = 0; i < raw.faces.size(); ++i) {
        faces.row(static_cast<Eigen::Index>(i)) = raw.faces[i].transpose();
    }

    std::optional<UVLayer> uv;
    std::size_t with_uv = 0;
    for (const auto& t : raw.face_uvs) {
        if ((t.array() >= 0).all()) ++with_uv;
    }
    if (!raw.faces.empty() && with_uv == raw.faces.size()) {
        UVLayer layer;
        layer.coords.resize(static_cast<Eigen::Index>(raw.uvs.size()), 2);
        for (std::size_t i = 0; i < raw.uvs.size(); ++i) {
            layer.coords.row(static_cast<Eigen::Index>(i)) = raw.uvs[i].transpose();
        }
        layer.faces.resize(faces.rows(), 3);
        for (std::size_t i = 0; i < raw.face_uvs.size(); ++i) {
            const auto& t = raw.face_uvs[i];
            if ((t.array() >= static_cast<int>(raw.uvs.size())).any()) {
                throw ValidationError(
                    "face " + std::to_string(i) + " references a texture coordinate out of range (line " +
                    std::to_string(raw.face_lines[i]) + ")");
            }
            layer.faces.row(static_cast<Eigen::Index>(i)) = t.transpose();
        }
        uv = std::move(layer);
    } else if (with_uv > 0) {
        warn("only some faces carry texture coordinates; dropping uv");
    }
    return TriMesh(std::move(vertices), std::move(faces), std::move(uv));
}

TriMesh load_obj(std::istream& in)
{
    return to_mesh(parse_obj(in));
}

TriMesh load_obj(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open mesh file " + path.string());
    return load_obj(in);
}

void save_obj(std::ostream& out, const TriMesh& mesh)
{
    save_obj(out, mesh, mesh.vertices());
}

void save_obj(std::ostream& out, const TriMesh& mesh, const Vertices& positions)
{
    if (positions.rows() != mesh.num_vertices()) {
        throw ValidationError("save_obj: position count does not match mesh");
    }
    for (Eigen::Index i = 0; i < positions.rows(); ++i) {
        out << 'v';
        for (int k = 0; k < 3; ++k) {
            out << ' ';
            write_number(out, positions(i, k));
        }
        out << '\n';
    }
    const auto& uv = mesh.uv();
    if (uv) {
        for (Eigen::Index i = 0; i < uv->coords.rows(); ++i) {
            out << "vt ";
            write_number(out, uv->coords(i, 0));
            out << ' ';
            write_number(out, uv->coords(i, 1));
            out << '\n';
        }
    }
    const auto& faces = mesh.faces();
    for (Eigen::Index f = 0; f < faces.rows(); ++f) {
        out << 'f';
        for (int k = 0; k < 3; ++k) {
            out << ' ' << faces(f, k) + 1;
            if (uv) out << '/' << uv->faces(f, k) + 1;
        }
        out << '\n';
    }
    if (!out) throw Error("failed writing OBJ");
}

void save_obj(const std::filesystem::path& path, const TriMesh& mesh, const Vertices& positions)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    save_obj(out, mesh, positions);
}

} // namespace jacfield
