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
 * Reproducible training data and the on-disk formats for POVMs and datasets.
 *
 * A dataset directory holds:
 *   manifest.txt  key=value header, including the SHA-256 of povm.dat
 *   povm.dat      the measurement all records were simulated with
 *   train.dat     training records
 *   val.dat       validation records
 * All doubles are written with 17 significant digits, so a load reproduces
 * the saved values bit for bit.
 */

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qst/measurement.hpp"
#include "qst/neuralnet.hpp"

namespace qst {

inline constexpr int kDataFormatVersion = 1;

struct DatasetRecord {
    std::int64_t id = 0;
    std::int64_t trials = 0; ///< 0 = exact probabilities
    RealVector frequencies;  ///< m values
    RealVector bloch;        ///< d^2 values
    RealVector cholesky;     ///< d^2 values, CholeskyFactor::to_real() layout
};

struct DatasetOptions {
    std::int64_t count = 0;
    double sampled_fraction = 0.25;
    std::int64_t trials_min = 0; ///< 0 selects d^2
    std::int64_t trials_max = 100000;
    std::uint64_t seed = 0;
};

struct DatasetManifest {
    int dim = 0;
    int outcomes = 0;
    std::string povm_file = "povm.dat";
    std::string povm_sha256;
    std::string train_file = "train.dat";
    std::string val_file = "val.dat";
    std::int64_t train_records = 0;
    std::int64_t val_records = 0;
    double sampled_fraction = 0.0;
    double train_fraction = 0.8;
    std::int64_t trials_min = 0;
    std::int64_t trials_max = 0;
    std::uint64_t seed = 0;
};

/**
 * Fresh Ginibre state per record with exact Born probabilities; the first
 * ceil(fraction * count) records of a seeded permutation are replaced by
 * multinomial frequencies at a trial count drawn log-uniformly from
 * [trials_min, trials_max]. Each record uses its own derived seed.
 */
std::vector<DatasetRecord> generate_dataset(const Povm &povm, const DatasetOptions &options);

/// Seeded shuffle, then the first round(train_fraction * n) records train.
std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>>
split_dataset(const std::vector<DatasetRecord> &records, double train_fraction, std::uint64_t seed);

/// Frequencies as inputs, the chosen head's targets as outputs.
Dataset to_training_set(const std::vector<DatasetRecord> &records, HeadKind head);

std::string serialize_povm(const Povm &povm);
Povm parse_povm(const std::string &text, const std::string &source);
void save_povm(const Povm &povm, const std::string &path);
Povm load_povm(const std::string &path);

std::string serialize_records(const std::vector<DatasetRecord> &records, int dim, int outcomes);
std::vector<DatasetRecord> parse_records(const std::string &text, int dim, int outcomes,
                                         const std::string &source);
void save_records(const std::vector<DatasetRecord> &records, int dim, int outcomes, const std::string &path);
std::vector<DatasetRecord> load_records(const std::string &path, int dim, int outcomes);

std::string record_schema(int dim, int outcomes);

void save_manifest(const DatasetManifest &manifest, const std::string &path);
DatasetManifest load_manifest(const std::string &path);

struct LoadedDataset {
    DatasetManifest manifest;
    Povm povm;
    std::vector<DatasetRecord> train;
    std::vector<DatasetRecord> validation;
};

/// Generates, splits and writes a complete dataset directory.
DatasetManifest write_dataset_directory(const std::string &dir, const Povm &povm,
                                        const DatasetOptions &options, double train_fraction);

/// Loads a dataset directory; refuses a POVM whose hash differs from the
/// manifest or record counts that disagree with it.
LoadedDataset load_dataset_directory(const std::string &dir);

} // namespace qst
