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

// Command-line driver: POVM and dataset generation, training, and the three
// benchmark experiments. Talks to the library only through qtomo.h.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qtomo/qtomo.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

/// Keys accepted in --config files; each one mirrors a --long-option.
const std::vector<std::string> kSettingKeys = {
    "dim",        "seed",       "out",          "povm",       "count",      "sampled_fraction",
    "trials_min", "trials_max", "train_fraction", "data",     "head",       "hidden",
    "epochs",     "patience",   "batches",      "learning_rate", "estimators", "grid",
    "states",     "bloch_model", "cholesky_model", "threads",
};

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Failure : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(qt_status status) {
    if (status != QT_OK) {
        throw Failure(std::string(qt_status_name(status)) + ": " + qt_last_error());
    }
}

class Settings {
  public:
    void set(const std::string &key, const std::string &value) { values_[key] = value; }

    [[nodiscard]] bool has(const std::string &key) const { return values_.count(key) > 0; }

    [[nodiscard]] std::string str(const std::string &key, const std::string &fallback = "") const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    [[nodiscard]] std::string required(const std::string &key) const {
        if (!has(key) || str(key).empty()) {
            throw UsageError("missing required setting --" + dashed(key));
        }
        return str(key);
    }

    [[nodiscard]] long long integer(const std::string &key, long long fallback) const {
        if (!has(key)) {
            return fallback;
        }
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(str(key), &pos);
            if (pos != str(key).size()) {
                throw std::invalid_argument(key);
            }
            return v;
        } catch (const std::exception &) {
            throw UsageError("--" + dashed(key) + ": expected an integer, got '" + str(key) + "'");
        }
    }

    [[nodiscard]] std::uint64_t seed() const {
        if (!has("seed")) {
            return 0;
        }
        try {
            std::size_t pos = 0;
            const auto v = std::stoull(str("seed"), &pos);
            if (pos != str("seed").size()) {
                throw std::invalid_argument("seed");
            }
            return v;
        } catch (const std::exception &) {
            throw UsageError("--seed: expected a nonnegative integer, got '" + str("seed") + "'");
        }
    }

    [[nodiscard]] double real(const std::string &key, double fallback) const {
        if (!has(key)) {
            return fallback;
        }
        try {
            std::size_t pos = 0;
            const double v = std::stod(str(key), &pos);
            if (pos != str(key).size()) {
                throw std::invalid_argument(key);
            }
            return v;
        } catch (const std::exception &) {
            throw UsageError("--" + dashed(key) + ": expected a number, got '" + str(key) + "'");
        }
    }

    static std::string dashed(std::string key) {
        for (auto &c : key) {
            if (c == '_') {
                c = '-';
            }
        }
        return key;
    }

  private:
    std::map<std::string, std::string> values_;
};

std::vector<std::string> split_list(const std::string &s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

std::vector<int> parse_widths(const std::string &s) {
    std::vector<int> out;
    for (const auto &w : split_list(s)) {
        try {
            out.push_back(std::stoi(w));
        } catch (const std::exception &) {
            throw UsageError("--hidden: expected comma-separated widths, got '" + s + "'");
        }
    }
    return out;
}

std::vector<std::int64_t> parse_grid(const std::string &s) {
    std::vector<std::int64_t> out;
    for (const auto &t : split_list(s)) {
        if (t == "exact") {
            out.push_back(0);
            continue;
        }
        try {
            out.push_back(std::stoll(t));
        } catch (const std::exception &) {
            throw UsageError("--grid: expected comma-separated trial counts or 'exact', got '" + s + "'");
        }
    }
    return out;
}

void load_config_file(const std::string &path, Settings &settings) {
    qt_config *raw = nullptr;
    check(qt_config_load(path.c_str(), &raw));
    std::unique_ptr<qt_config, decltype(&qt_config_free)> cfg(raw, qt_config_free);
    for (std::size_t i = 0; i < qt_config_size(cfg.get()); ++i) {
        const std::string key = qt_config_key_at(cfg.get(), i);
        bool known = false;
        for (const auto &k : kSettingKeys) {
            known = known || k == key;
        }
        if (!known) {
            throw UsageError(path + ": unknown configuration key '" + key + "'");
        }
        settings.set(key, qt_config_get(cfg.get(), key.c_str()));
    }
}

using PovmHandle = std::unique_ptr<qt_povm, decltype(&qt_povm_free)>;

PovmHandle load_povm(const std::string &path) {
    qt_povm *raw = nullptr;
    check(qt_povm_load(path.c_str(), &raw));
    return {raw, qt_povm_free};
}

int cmd_gen_povm(const Settings &s) {
    const int dim = static_cast<int>(s.integer("dim", 0));
    const std::string out = s.required("out");
    qt_povm *raw = nullptr;
    check(qt_povm_generate_srm(dim, s.seed(), &raw));
    PovmHandle povm(raw, qt_povm_free);
    check(qt_povm_save(povm.get(), out.c_str()));
    std::cout << "wrote " << qt_povm_outcomes(povm.get()) << "-outcome POVM (d=" << dim << ") to " << out << "\n";
    return 0;
}

int cmd_gen_data(const Settings &s) {
    const auto povm = load_povm(s.required("povm"));
    const std::string out = s.required("out");
    qt_dataset_options o;
    qt_dataset_options_init(&o);
    o.count = s.integer("count", o.count);
    o.sampled_fraction = s.real("sampled_fraction", o.sampled_fraction);
    o.trials_min = s.integer("trials_min", o.trials_min);
    o.trials_max = s.integer("trials_max", o.trials_max);
    o.train_fraction = s.real("train_fraction", o.train_fraction);
    o.seed = s.seed();
    check(qt_dataset_generate(povm.get(), &o, out.c_str()));
    std::cout << "wrote " << o.count << " records to " << out << "\n";
    return 0;
}

int cmd_train(const Settings &s) {
    const std::string data = s.required("data");
    const std::string out = s.required("out");
    qt_train_options o;
    qt_train_options_init(&o);
    const std::string head = s.str("head", "bloch");
    if (head == "bloch") {
        o.head = QT_HEAD_BLOCH;
    } else if (head == "cholesky") {
        o.head = QT_HEAD_CHOLESKY;
    } else {
        throw UsageError("--head: expected bloch or cholesky, got '" + head + "'");
    }
    const std::vector<int> hidden = parse_widths(s.str("hidden"));
    o.hidden = hidden.empty() ? nullptr : hidden.data();
    o.n_hidden = hidden.size();
    o.max_epochs = static_cast<int>(s.integer("epochs", o.max_epochs));
    o.patience = static_cast<int>(s.integer("patience", o.patience));
    o.batches_per_epoch = static_cast<int>(s.integer("batches", o.batches_per_epoch));
    o.learning_rate = s.real("learning_rate", o.learning_rate);
    o.seed = s.seed();
    qt_train_summary summary{};
    check(qt_train(data.c_str(), &o, out.c_str(), &summary));
    std::cout << "trained " << head << " model: " << summary.epochs_run << " epochs, best epoch "
              << summary.best_epoch << ", validation loss " << summary.initial_validation_loss << " -> "
              << summary.best_validation_loss << (summary.stopped_early ? " (early stop)" : "") << "\n"
              << "wrote " << out << "\n";
    return 0;
}

enum class Experiment { Accuracy, Timing, Positivity };

int cmd_experiment(const Settings &s, Experiment kind) {
    const std::string povm_path = s.required("povm");
    const std::string out = s.required("out");
    int dim = static_cast<int>(s.integer("dim", 0));
    if (dim == 0) {
        dim = qt_povm_dim(load_povm(povm_path).get());
    }
    const std::string default_estimators = kind == Experiment::Positivity ? "li" : "li,li_pos,cls,mle";
    const std::string estimators = s.str("estimators", default_estimators);
    const std::string bloch = s.str("bloch_model");
    const std::string cholesky = s.str("cholesky_model");
    const std::vector<std::int64_t> grid = parse_grid(s.str("grid"));

    qt_experiment_options o;
    qt_experiment_options_init(&o);
    o.dim = dim;
    o.povm_path = povm_path.c_str();
    o.estimators = estimators.c_str();
    o.trial_grid = grid.empty() ? nullptr : grid.data();
    o.grid_size = grid.size();
    o.test_states = static_cast<int>(s.integer("states", o.test_states));
    o.seed = s.seed();
    o.bloch_model = bloch.empty() ? nullptr : bloch.c_str();
    o.cholesky_model = cholesky.empty() ? nullptr : cholesky.c_str();
    o.threads = static_cast<int>(s.integer("threads", o.threads));

    switch (kind) {
    case Experiment::Accuracy:
        check(qt_run_accuracy(&o, out.c_str()));
        break;
    case Experiment::Timing:
        check(qt_run_timing(&o, out.c_str()));
        break;
    case Experiment::Positivity:
        check(qt_run_positivity(&o, out.c_str()));
        break;
    }
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_report(const Settings &s, const std::vector<std::string> &inputs) {
    const std::string out = s.required("out");
    if (inputs.empty()) {
        throw UsageError("report: no input CSV files given");
    }
    std::vector<const char *> paths;
    for (const auto &p : inputs) {
        paths.push_back(p.c_str());
    }
    check(qt_report_merge(paths.data(), paths.size(), out.c_str()));
    std::cout << "wrote " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"qtomo: quantum state tomography benchmarks (classical and neural-network estimators)"};
    app.require_subcommand(1);
    app.fallthrough();

    // One storage slot per registration: the same key can appear on several subcommands.
    std::vector<std::pair<std::string, std::unique_ptr<std::string>>> slots;
    std::vector<CLI::Option *> options;
    auto add = [&](CLI::App &target, const std::string &key, const std::string &help) {
        slots.emplace_back(key, std::make_unique<std::string>());
        options.push_back(target.add_option("--" + Settings::dashed(key), *slots.back().second, help));
    };

    std::string config_path;
    app.add_option("--config", config_path, "key=value file supplying defaults for any option")
        ->check(CLI::ExistingFile);
    add(app, "seed", "master seed for all randomness");
    add(app, "dim", "Hilbert-space dimension");
    add(app, "out", "output file or directory");

    auto *gen_povm = app.add_subcommand("gen-povm", "generate a square-root measurement with d^2 outcomes");

    auto *gen_data = app.add_subcommand("gen-data", "generate a training/validation dataset directory");
    add(*gen_data, "povm", "POVM file");
    add(*gen_data, "count", "number of records (default 1000)");
    add(*gen_data, "sampled_fraction", "fraction of records with sampled statistics (default 0.25)");
    add(*gen_data, "trials_min", "smallest trial count (default d^2)");
    add(*gen_data, "trials_max", "largest trial count (default 100000)");
    add(*gen_data, "train_fraction", "training share of the records (default 0.8)");

    auto *train = app.add_subcommand("train", "train a network estimator on a dataset directory");
    add(*train, "data", "dataset directory");
    add(*train, "head", "bloch or cholesky");
    add(*train, "hidden", "comma-separated hidden widths (default 200,180,180,160,160,160,160,100)");
    add(*train, "epochs", "maximum epochs (default 500)");
    add(*train, "patience", "early-stopping patience in epochs (default 200)");
    add(*train, "batches", "mini-batches per epoch (default 100)");
    add(*train, "learning_rate", "Nadam learning rate (default 0.001)");

    std::vector<CLI::App *> experiments;
    for (const auto &[name, help] : std::vector<std::pair<std::string, std::string>>{
             {"accuracy", "mean Hilbert-Schmidt error against the number of trials"},
             {"timing", "mean wall time per estimate"},
             {"positivity", "negative eigenvalues of unconstrained estimates"}}) {
        auto *sub = app.add_subcommand(name, help);
        add(*sub, "povm", "POVM file");
        add(*sub, "estimators", "comma-separated: li,li_pos,cls,mle,nn_bloch,nn_cholesky");
        add(*sub, "grid", "comma-separated trial counts, 'exact' for noise-free data");
        add(*sub, "states", "number of random test states (default 100)");
        add(*sub, "bloch_model", "trained Bloch-head model file");
        add(*sub, "cholesky_model", "trained Cholesky-head model file");
        add(*sub, "threads", "worker threads for accuracy/positivity (default 1)");
        experiments.push_back(sub);
    }

    auto *report = app.add_subcommand("report", "merge CSV reports into one summary table");
    std::vector<std::string> report_inputs;
    report->add_option("inputs", report_inputs, "CSV files produced by accuracy/timing/positivity");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        Settings settings;
        if (!config_path.empty()) {
            load_config_file(config_path, settings);
        }
        for (std::size_t i = 0; i < options.size(); ++i) {
            if (options[i]->count() > 0) {
                settings.set(slots[i].first, *slots[i].second);
            }
        }

        if (gen_povm->parsed()) {
            return cmd_gen_povm(settings);
        }
        if (gen_data->parsed()) {
            return cmd_gen_data(settings);
        }
        if (train->parsed()) {
            return cmd_train(settings);
        }
        if (experiments[0]->parsed()) {
            return cmd_experiment(settings, Experiment::Accuracy);
        }
        if (experiments[1]->parsed()) {
            return cmd_experiment(settings, Experiment::Timing);
        }
        if (experiments[2]->parsed()) {
            return cmd_experiment(settings, Experiment::Positivity);
        }
        if (report->parsed()) {
            return cmd_report(settings, report_inputs);
        }
    } catch (const UsageError &e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    } catch (const Failure &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
