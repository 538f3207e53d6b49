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

#include "qst/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "qst/error.hpp"
#include "qst/text_io.hpp"

namespace qst {

namespace {

constexpr std::uint64_t kAllocationStream = 3;
constexpr std::uint64_t kRecordStream = 4;
constexpr std::uint64_t kSplitStream = 5;

std::int64_t log_uniform_trials(std::int64_t lo, std::int64_t hi, Rng &rng) {
    if (lo == hi) {
        return lo;
    }
    std::uniform_real_distribution<double> u(std::log(double(lo)), std::log(double(hi)));
    const auto n = static_cast<std::int64_t>(std::llround(std::exp(u(rng))));
    return std::clamp(n, lo, hi);
}

/// Splits "header---body" documents; the header is key=value.
std::pair<KeyValueFile, std::string> split_document(const std::string &text, const std::string &source,
                                                    const std::string &magic) {
    if (text.rfind(magic, 0) != 0) {
        fail(ErrorKind::Parse, source + ": not a " + magic.substr(2) + " file");
    }
    const auto sep = text.find("\n---\n");
    if (sep == std::string::npos) {
        fail(ErrorKind::Parse, source + ": missing '---' header terminator");
    }
    KeyValueFile header = KeyValueFile::parse(text.substr(0, sep + 1), source);
    const auto version = parse_int(header.get("format_version"), source + ": format_version");
    if (version != kDataFormatVersion) {
        fail(ErrorKind::Parse, source + ": unsupported format version " + std::to_string(version));
    }
    return {std::move(header), text.substr(sep + 5)};
}

/// Number of header lines before the body, for line-numbered diagnostics.
int body_first_line(const std::string &text) {
    const auto sep = text.find("\n---\n");
    return static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(sep) + 5, '\n')) + 1;
}

void append_values(std::string &out, const RealVector &v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out += ' ';
        out += format_double(v[i]);
    }
}

} // namespace

std::vector<DatasetRecord> generate_dataset(const Povm &povm, const DatasetOptions &options) {
    const int d = povm.dim();
    if (options.count < 0) {
        fail(ErrorKind::InvalidArgument, "generate_dataset: negative record count");
    }
    if (!(options.sampled_fraction >= 0.0 && options.sampled_fraction <= 1.0)) {
        fail(ErrorKind::InvalidArgument, "generate_dataset: sampled fraction must lie in [0, 1]");
    }
    const std::int64_t trials_min = options.trials_min == 0 ? std::int64_t(d) * d : options.trials_min;
    if (trials_min < 1 || options.trials_max < trials_min) {
        fail(ErrorKind::InvalidArgument, "generate_dataset: need 1 <= trials_min <= trials_max");
    }
    const OperatorBasis basis = gell_mann_basis(d);

    const auto count = static_cast<std::size_t>(options.count);
    const auto sampled = static_cast<std::size_t>(std::ceil(options.sampled_fraction * double(count) - 1e-9));
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng alloc_rng(derive_seed(options.seed, 0, kAllocationStream));
    std::shuffle(order.begin(), order.end(), alloc_rng);
    std::vector<char> is_sampled(count, 0);
    for (std::size_t i = 0; i < std::min(sampled, count); ++i) {
        is_sampled[order[i]] = 1;
    }

    std::vector<DatasetRecord> records(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(derive_seed(options.seed, i, kRecordStream));
        const DensityMatrix rho = random_density_ginibre(d, rng);
        const ProbabilityVector p = born_probabilities(rho, povm);
        DatasetRecord &r = records[i];
        r.id = static_cast<std::int64_t>(i);
        if (is_sampled[i]) {
            r.trials = log_uniform_trials(trials_min, options.trials_max, rng);
            r.frequencies = sample_frequencies(p, r.trials, rng).values;
        } else {
            r.trials = 0;
            r.frequencies = p.values;
        }
        r.bloch = to_bloch(rho, basis).coords;
        r.cholesky = state_to_cholesky(rho).to_real();
    }
    return records;
}

std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>>
split_dataset(const std::vector<DatasetRecord> &records, double train_fraction, std::uint64_t seed) {
    if (records.empty()) {
        fail(ErrorKind::InvalidArgument, "split_dataset: empty dataset");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        fail(ErrorKind::InvalidArgument, "split_dataset: train fraction must lie in (0, 1)");
    }
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, 0, kSplitStream));
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * double(records.size())));
    std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> out;
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < n_train ? out.first : out.second).push_back(records[order[i]]);
    }
    return out;
}

Dataset to_training_set(const std::vector<DatasetRecord> &records, HeadKind head) {
    Dataset ds;
    if (records.empty()) {
        return ds;
    }
    const auto n = static_cast<Eigen::Index>(records.size());
    ds.inputs.resize(records.front().frequencies.size(), n);
    ds.targets.resize(records.front().bloch.size(), n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto &r = records[static_cast<std::size_t>(i)];
        ds.inputs.col(i) = r.frequencies;
        ds.targets.col(i) = head == HeadKind::Bloch ? r.bloch : r.cholesky;
    }
    return ds;
}

std::string serialize_povm(const Povm &povm) {
    KeyValueFile header;
    header.set("format_version", std::to_string(kDataFormatVersion));
    header.set("dim", std::to_string(povm.dim()));
    header.set("outcomes", std::to_string(povm.outcomes()));
    header.set("layout", "one element per line, row-major, re im pairs");
    std::string out = "# qtomo povm\n" + header.serialize() + "---\n";
    for (const auto &e : povm.elements()) {
        bool first = true;
        for (int i = 0; i < povm.dim(); ++i) {
            for (int j = 0; j < povm.dim(); ++j) {
                if (!first) {
                    out += ' ';
                }
                first = false;
                out += format_double(e(i, j).real());
                out += ' ';
                out += format_double(e(i, j).imag());
            }
        }
        out += '\n';
    }
    return out;
}

Povm parse_povm(const std::string &text, const std::string &source) {
    auto [header, body] = split_document(text, source, "# qtomo povm");
    const int d = static_cast<int>(parse_int(header.get("dim"), source + ": dim"));
    const int m = static_cast<int>(parse_int(header.get("outcomes"), source + ": outcomes"));
    if (d < 1 || m < 1) {
        fail(ErrorKind::Parse, source + ": dim and outcomes must be positive");
    }
    const int first_line = body_first_line(text);
    std::istringstream in(body);
    std::string line;
    std::vector<ComplexMatrix> elements;
    for (int l = 0; l < m; ++l) {
        const std::string where = source + ":" + std::to_string(first_line + l) + ": element " + std::to_string(l);
        if (!std::getline(in, line)) {
            fail(ErrorKind::Parse, where + ": file truncated");
        }
        const auto fields = split_fields(line);
        if (fields.size() != static_cast<std::size_t>(2 * d * d)) {
            fail(ErrorKind::Parse, where + ": expected " + std::to_string(2 * d * d) + " fields, got " +
                                       std::to_string(fields.size()));
        }
        ComplexMatrix e(d, d);
        std::size_t k = 0;
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                const double re = parse_double(fields[k++], where);
                const double im = parse_double(fields[k++], where);
                e(i, j) = Complex(re, im);
            }
        }
        elements.push_back(std::move(e));
    }
    // Symmetrizing an exactly Hermitian matrix is bitwise the identity, so
    // the checked constructor keeps save/load round trips exact.
    return Povm(std::move(elements));
}

void save_povm(const Povm &povm, const std::string &path) {
    write_file(path, serialize_povm(povm));
}

Povm load_povm(const std::string &path) {
    return parse_povm(read_file(path), path);
}

std::string record_schema(int dim, int outcomes) {
    const int n = dim * dim;
    return "id trials frequencies[" + std::to_string(outcomes) + "] bloch[" + std::to_string(n) +
           "] cholesky[" + std::to_string(n) + "]";
}

std::string serialize_records(const std::vector<DatasetRecord> &records, int dim, int outcomes) {
    KeyValueFile header;
    header.set("format_version", std::to_string(kDataFormatVersion));
    header.set("dim", std::to_string(dim));
    header.set("outcomes", std::to_string(outcomes));
    header.set("records", std::to_string(records.size()));
    header.set("schema", record_schema(dim, outcomes));
    std::string out = "# qtomo dataset\n" + header.serialize() + "---\n";
    for (const auto &r : records) {
        out += std::to_string(r.id);
        out += ' ';
        out += std::to_string(r.trials);
        append_values(out, r.frequencies);
        append_values(out, r.bloch);
        append_values(out, r.cholesky);
        out += '\n';
    }
    return out;
}

std::vector<DatasetRecord> parse_records(const std::string &text, int dim, int outcomes,
                                         const std::string &source) {
    auto [header, body] = split_document(text, source, "# qtomo dataset");
    if (parse_int(header.get("dim"), source + ": dim") != dim ||
        parse_int(header.get("outcomes"), source + ": outcomes") != outcomes) {
        fail(ErrorKind::Parse, source + ": dimension or outcome count differs from the manifest");
    }
    const auto count = parse_int(header.get("records"), source + ": records");
    const int n = dim * dim;
    const std::size_t expected_fields = 2 + static_cast<std::size_t>(outcomes) + 2 * static_cast<std::size_t>(n);
    const int first_line = body_first_line(text);

    std::vector<DatasetRecord> records;
    records.reserve(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
    std::istringstream in(body);
    std::string line;
    for (std::int64_t k = 0; k < count; ++k) {
        const std::string where =
            source + ":" + std::to_string(first_line + k) + ": record " + std::to_string(k);
        if (!std::getline(in, line)) {
            fail(ErrorKind::Parse, where + ": file truncated (header declares " + std::to_string(count) +
                                       " records)");
        }
        const auto fields = split_fields(line);
        if (fields.size() != expected_fields) {
            fail(ErrorKind::Parse, where + ": expected " + std::to_string(expected_fields) + " fields, got " +
                                       std::to_string(fields.size()));
        }
        DatasetRecord r;
        r.id = parse_int(fields[0], where);
        r.trials = parse_int(fields[1], where);
        if (r.trials < 0) {
            fail(ErrorKind::Parse, where + ": negative trial count");
        }
        std::size_t f = 2;
        auto take = [&](int len) {
            RealVector v(len);
            for (int i = 0; i < len; ++i) {
                v[i] = parse_double(fields[f++], where);
            }
            return v;
        };
        r.frequencies = take(outcomes);
        r.bloch = take(n);
        r.cholesky = take(n);
        records.push_back(std::move(r));
    }
    while (std::getline(in, line)) {
        if (!line.empty()) {
            fail(ErrorKind::Parse, source + ": more records than the header declares");
        }
    }
    return records;
}

void save_records(const std::vector<DatasetRecord> &records, int dim, int outcomes, const std::string &path) {
    write_file(path, serialize_records(records, dim, outcomes));
}

std::vector<DatasetRecord> load_records(const std::string &path, int dim, int outcomes) {
    return parse_records(read_file(path), dim, outcomes, path);
}

void save_manifest(const DatasetManifest &m, const std::string &path) {
    KeyValueFile kv;
    kv.set("format_version", std::to_string(kDataFormatVersion));
    kv.set("dim", std::to_string(m.dim));
    kv.set("outcomes", std::to_string(m.outcomes));
    kv.set("povm_file", m.povm_file);
    kv.set("povm_sha256", m.povm_sha256);
    kv.set("train_file", m.train_file);
    kv.set("val_file", m.val_file);
    kv.set("train_records", std::to_string(m.train_records));
    kv.set("val_records", std::to_string(m.val_records));
    kv.set("sampled_fraction", format_double(m.sampled_fraction));
    kv.set("train_fraction", format_double(m.train_fraction));
    kv.set("trials_min", std::to_string(m.trials_min));
    kv.set("trials_max", std::to_string(m.trials_max));
    kv.set("seed", std::to_string(m.seed));
    kv.set("record_schema", record_schema(m.dim, m.outcomes));
    write_file(path, "# qtomo dataset manifest\n" + kv.serialize());
}

DatasetManifest load_manifest(const std::string &path) {
    const KeyValueFile kv = KeyValueFile::load(path);
    const auto version = parse_int(kv.get("format_version"), path + ": format_version");
    if (version != kDataFormatVersion) {
        fail(ErrorKind::Parse, path + ": unsupported manifest version " + std::to_string(version));
    }
    DatasetManifest m;
    m.dim = static_cast<int>(parse_int(kv.get("dim"), path + ": dim"));
    m.outcomes = static_cast<int>(parse_int(kv.get("outcomes"), path + ": outcomes"));
    m.povm_file = kv.get("povm_file");
    m.povm_sha256 = kv.get("povm_sha256");
    m.train_file = kv.get("train_file");
    m.val_file = kv.get("val_file");
    m.train_records = parse_int(kv.get("train_records"), path + ": train_records");
    m.val_records = parse_int(kv.get("val_records"), path + ": val_records");
    m.sampled_fraction = parse_double(kv.get("sampled_fraction"), path + ": sampled_fraction");
    m.train_fraction = parse_double(kv.get("train_fraction"), path + ": train_fraction");
    m.trials_min = parse_int(kv.get("trials_min"), path + ": trials_min");
    m.trials_max = parse_int(kv.get("trials_max"), path + ": trials_max");
    m.seed = parse_uint(kv.get("seed"), path + ": seed");
    if (kv.get("record_schema") != record_schema(m.dim, m.outcomes)) {
        fail(ErrorKind::Parse, path + ": record schema does not match dim/outcomes");
    }
    return m;
}

DatasetManifest write_dataset_directory(const std::string &dir, const Povm &povm,
                                        const DatasetOptions &options, double train_fraction) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const auto records = generate_dataset(povm, options);
    const auto [train, val] = split_dataset(records, train_fraction, options.seed);

    DatasetManifest m;
    m.dim = povm.dim();
    m.outcomes = povm.outcomes();
    const std::string povm_text = serialize_povm(povm);
    write_file((fs::path(dir) / m.povm_file).string(), povm_text);
    m.povm_sha256 = sha256_hex(povm_text);
    save_records(train, m.dim, m.outcomes, (fs::path(dir) / m.train_file).string());
    save_records(val, m.dim, m.outcomes, (fs::path(dir) / m.val_file).string());
    m.train_records = static_cast<std::int64_t>(train.size());
    m.val_records = static_cast<std::int64_t>(val.size());
    m.sampled_fraction = options.sampled_fraction;
    m.train_fraction = train_fraction;
    m.trials_min = options.trials_min == 0 ? std::int64_t(m.dim) * m.dim : options.trials_min;
    m.trials_max = options.trials_max;
    m.seed = options.seed;
    save_manifest(m, (fs::path(dir) / "manifest.txt").string());
    return m;
}

LoadedDataset load_dataset_directory(const std::string &dir) {
    namespace fs = std::filesystem;
    const std::string manifest_path = (fs::path(dir) / "manifest.txt").string();
    DatasetManifest m = load_manifest(manifest_path);
    const std::string povm_path = (fs::path(dir) / m.povm_file).string();
    const std::string povm_text = read_file(povm_path);
    if (sha256_hex(povm_text) != m.povm_sha256) {
        fail(ErrorKind::Integrity, povm_path + ": content hash does not match " + manifest_path);
    }
    Povm povm = parse_povm(povm_text, povm_path);
    if (povm.dim() != m.dim || povm.outcomes() != m.outcomes) {
        fail(ErrorKind::Integrity, povm_path + ": shape differs from the manifest");
    }
    auto train = load_records((fs::path(dir) / m.train_file).string(), m.dim, m.outcomes);
    auto val = load_records((fs::path(dir) / m.val_file).string(), m.dim, m.outcomes);
    if (static_cast<std::int64_t>(train.size()) != m.train_records ||
        static_cast<std::int64_t>(val.size()) != m.val_records) {
        fail(ErrorKind::Integrity, manifest_path + ": record counts do not match the data files");
    }
    return {std::move(m), std::move(povm), std::move(train), std::move(val)};
}

} // namespace qst
