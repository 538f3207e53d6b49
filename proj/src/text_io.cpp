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

#include "qst/text_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "qst/error.hpp"

namespace qst {

std::string format_double(double x) {
    char buf[40];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
    return {buf, static_cast<std::size_t>(n)};
}

namespace {

template <typename T>
T parse_number(std::string_view token, const std::string &context, const char *kind) {
    T value{};
    const char *first = token.data();
    const char *last = token.data() + token.size();
    if (!token.empty() && token.front() == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (token.empty() || ec != std::errc() || ptr != last) {
        fail(ErrorKind::Parse, context + ": expected " + kind + ", got '" + std::string(token) + "'");
    }
    return value;
}

} // namespace

double parse_double(std::string_view token, const std::string &context) {
    return parse_number<double>(token, context, "a decimal number");
}

std::int64_t parse_int(std::string_view token, const std::string &context) {
    return parse_number<std::int64_t>(token, context, "an integer");
}

std::uint64_t parse_uint(std::string_view token, const std::string &context) {
    return parse_number<std::uint64_t>(token, context, "a nonnegative integer");
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        if (sep == ' ') {
            while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) {
                ++pos;
            }
            if (pos == line.size()) {
                break;
            }
        }
        std::size_t end = pos;
        while (end < line.size() && line[end] != sep && !(sep == ' ' && line[end] == '\t')) {
            ++end;
        }
        out.push_back(line.substr(pos, end - pos));
        pos = end + 1;
    }
    return out;
}

KeyValueFile KeyValueFile::parse(const std::string &text, const std::string &source) {
    KeyValueFile kv;
    kv.source_ = source;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            fail(ErrorKind::Parse, source + ":" + std::to_string(lineno) + ": expected key=value");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            fail(ErrorKind::Parse, source + ":" + std::to_string(lineno) + ": empty key");
        }
        kv.set(key, trim(line.substr(eq + 1)));
    }
    return kv;
}

KeyValueFile KeyValueFile::load(const std::string &path) {
    return parse(read_file(path), path);
}

void KeyValueFile::set(const std::string &key, const std::string &value) {
    for (auto &[k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

bool KeyValueFile::contains(const std::string &key) const {
    for (const auto &e : entries_) {
        if (e.first == key) {
            return true;
        }
    }
    return false;
}

const std::string &KeyValueFile::get(const std::string &key) const {
    for (const auto &e : entries_) {
        if (e.first == key) {
            return e.second;
        }
    }
    fail(ErrorKind::Parse, (source_.empty() ? std::string("key-value file") : source_) +
                               ": missing key '" + key + "'");
}

std::string KeyValueFile::get_or(const std::string &key, const std::string &fallback) const {
    return contains(key) ? get(key) : fallback;
}

std::string KeyValueFile::serialize() const {
    std::string out;
    for (const auto &[k, v] : entries_) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::Io, "cannot open '" + path + "' for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string &path, const std::string &contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
        fail(ErrorKind::Io, "write to '" + path + "' failed");
    }
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        fail(ErrorKind::Io, "SHA-256 computation failed");
    }
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return hex.str();
}

} // namespace qst
