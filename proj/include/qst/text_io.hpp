// Copyright 2026 The qtomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Text serialization helpers shared by all file formats: exact decimal
 * encoding of doubles, `key=value` headers, and SHA-256 content hashes.
 */

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qst {

/// 17 significant digits; parse_double(format_double(x)) == x for finite x.
std::string format_double(double x);

/// Parses one full token; throws Parse on junk or trailing characters.
double parse_double(std::string_view token, const std::string &context);
std::int64_t parse_int(std::string_view token, const std::string &context);
std::uint64_t parse_uint(std::string_view token, const std::string &context);

std::vector<std::string_view> split_fields(std::string_view line, char sep = ' ');

/// Ordered `key=value` map. Lines starting with '#' and blank lines are
/// ignored on read.
class KeyValueFile {
  public:
    static KeyValueFile parse(const std::string &text, const std::string &source);
    static KeyValueFile load(const std::string &path);

    void set(const std::string &key, const std::string &value);
    [[nodiscard]] bool contains(const std::string &key) const;
    /// Throws Parse naming the missing key and the source.
    [[nodiscard]] const std::string &get(const std::string &key) const;
    [[nodiscard]] std::string get_or(const std::string &key, const std::string &fallback) const;
    [[nodiscard]] const std::vector<std::pair<std::string, std::string>> &entries() const noexcept {
        return entries_;
    }

    [[nodiscard]] std::string serialize() const;

  private:
    std::string source_;
    std::vector<std::pair<std::string, std::string>> entries_;
};

std::string read_file(const std::string &path);
void write_file(const std::string &path, const std::string &contents);

std::string sha256_hex(std::string_view bytes);

} // namespace qst
