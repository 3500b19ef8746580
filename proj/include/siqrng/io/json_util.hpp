// Copyright 2026 The siqrng Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "siqrng/error.hpp"

namespace siqrng::io {

using Json = nlohmann::ordered_json;

inline Json read_json_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error &e) {
        throw Error(ErrorKind::schema, path.string() + ": " + e.what());
    }
}

inline void write_text_file(const std::filesystem::path &path, std::string_view text) {
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorKind::io, "cannot open " + path.string() + " for writing");
    out << text;
    require(static_cast<bool>(out), ErrorKind::io, "write failed for " + path.string());
}

namespace detail {

/// Rejects keys outside `allowed`, so misspelled fields do not pass silently.
inline void check_keys(const Json &obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
    require(obj.is_object(), ErrorKind::schema, std::string(where) + " must be an object");
    for (const auto &item : obj.items()) {
        bool known = false;
        for (auto key : allowed) {
            known = known || item.key() == key;
        }
        require(known, ErrorKind::schema, std::string(where) + ": unknown field '" + item.key() + "'");
    }
}

template <typename T>
T get_field(const Json &obj, std::string_view where, const std::string &key) {
    require(obj.contains(key), ErrorKind::schema, std::string(where) + ": missing field '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const Json::exception &e) {
        throw Error(ErrorKind::schema, std::string(where) + ": field '" + key + "' has the wrong type (" + e.what() + ")");
    }
}

template <typename T>
std::optional<T> get_optional(const Json &obj, std::string_view where, const std::string &key) {
    if (!obj.contains(key) || obj.at(key).is_null()) {
        return std::nullopt;
    }
    return get_field<T>(obj, where, key);
}

/// Counts must be non-negative integers; JSON floats are refused.
inline std::uint64_t get_count(const Json &obj, std::string_view where, const std::string &key) {
    require(obj.contains(key), ErrorKind::schema, std::string(where) + ": missing field '" + key + "'");
    const Json &v = obj.at(key);
    require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0), ErrorKind::schema,
            std::string(where) + ": field '" + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

inline std::optional<std::uint64_t> get_optional_count(const Json &obj, std::string_view where,
                                                       const std::string &key) {
    if (!obj.contains(key) || obj.at(key).is_null()) {
        return std::nullopt;
    }
    return get_count(obj, where, key);
}

}  // namespace detail

}  // namespace siqrng::io
