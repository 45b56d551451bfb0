#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "mia/baselines.hpp"
#include "mia/config.hpp"
#include "mia/data_model.hpp"
#include "mia/diff_attack.hpp"
#include "mia/eval.hpp"
#include "mia/harness.hpp"
#include "mia/toy_models.hpp"

namespace fs = std::filesystem;
using namespace mia;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitUpstream = 3;
constexpr int kExitNumerical = 4;

struct CliOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string output_dir_flag;
    int jobs = 1;
};

RunConfig load_run_config(const CliOptions& opts) {
    ConfigMap map = opts.config_path.empty() ? ConfigMap::parse_string("", "<default>")
                                             : ConfigMap::parse_file(opts.config_path);
    for (const auto& ov : opts.overrides) map.apply_override(ov);
    RunConfig cfg = RunConfig::from_map(map);
    if (!opts.output_dir_flag.empty()) {
        cfg.output_dir = opts.output_dir_flag;
    } else if (const char* root = std::getenv("MIA_OUTPUT_ROOT")) {
        cfg.output_dir = (fs::path(root) / cfg.output_dir).string();
    }
    return cfg;
}

void ensure_output_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

std::string attack_file_tag(const std::string& attack) {
    std::string tag;
    for (char c : attack)
        if (c != '/') tag += (c == '+' ? '-' : c);
    return tag;
}

// --- synthetic feature files: CSV "label,f0,...,f{d-1}" -------------------

void save_features_csv(const SyntheticData& data, const std::string& path,
                       const std::string& digest) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write feature file: " + path);
    if (!digest.empty()) out << "# config_digest=" << digest << '\n';
    const std::size_t dim = data.features.empty() ? 0 : data.features[0].size();
    out << "label";
    for (std::size_t j = 0; j < dim; ++j) out << ",f" << j;
    out << '\n';
    char buf[64];
    for (std::size_t i = 0; i < data.features.size(); ++i) {
        out << data.labels[i];
        for (double v : data.features[i]) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

SyntheticData load_features_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open feature file: " + path + " (run `mia synth` first?)");
    SyntheticData data;
    std::string line;
    std::size_t lineno = 0, dim = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;  // "label,f0,..."
            continue;
        }
        std::istringstream ss(line);
        std::string cell;
        if (!std::getline(ss, cell, ','))
            throw ValidationError(path + ":" + std::to_string(lineno) + ": empty row");
        std::vector<double> feats;
        int label;
        try {
            label = std::stoi(cell);
            while (std::getline(ss, cell, ',')) feats.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": bad number");
        }
        if (dim == 0) dim = feats.size();
        if (feats.size() != dim)
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": inconsistent feature dimension");
        data.labels.push_back(label);
        data.features.push_back(std::move(feats));
    }
    if (data.features.empty()) throw ValidationError(path + ": no data rows");
    return data;
}

// --- capability matrix ----------------------------------------------------

bool attack_needs_labels(const std::string& name) {
    return name == "label-only" || name == "loss-threshold" || name == "top2+true";
}

bool attack_needs_shadow(const std::string& name) {
    return name == "loss-threshold" || name == "nn" || name == "top3-nn" ||
           name == "top2+true";
}

void check_capabilities(const std::string& name, const ProbeDataset& target) {
    if (!attack_needs_labels(name)) return;
    for (const auto& r : target.records)
        if (!r.true_label)
            throw ValidationError(
                "attack '" + name +
                "' requires ground-truth labels, but the probe file is blind; per the "
                "threat-model capability matrix this invocation is refused");
}

// --- subcommand bodies ----------------------------------------------------

int cmd_synth(const RunConfig& cfg) {
    cfg.benchmark.synth.validate();
    ensure_output_dir(cfg.output_dir);

    SyntheticSpec train_spec = cfg.benchmark.synth;
    train_spec.seed = cfg.benchmark.seed;
    SyntheticSpec holdout_spec = cfg.benchmark.synth;
    holdout_spec.seed = cfg.benchmark.seed + 0x9e3779b97f4a7c15ull;

    const fs::path out(cfg.output_dir);
    save_features_csv(make_synthetic_dataset(train_spec), (out / "train.csv").string(),
                      cfg.digest);
    save_features_csv(make_synthetic_dataset(holdout_spec), (out / "holdout.csv").string(),
                      cfg.digest);
    std::cout << "wrote " << (out / "train.csv").string() << " and "
              << (out / "holdout.csv").string() << '\n';
    return kExitOk;
}

int cmd_train(const RunConfig& cfg) {
    const fs::path out(cfg.output_dir);
    const SyntheticData train = load_features_csv((out / "train.csv").string());
    ensure_output_dir(cfg.output_dir);
    const ToyModel model =
        train_model(train.features, train.labels, cfg.benchmark.arch, cfg.benchmark.epochs,
                    cfg.benchmark.learning_rate, cfg.benchmark.seed);
    save_model(model, (out / "model.json").string(), cfg.digest);
    std::cout << "trained " << to_string(cfg.benchmark.arch)
              << ", train accuracy " << model.final_train_accuracy << ", wrote "
              << (out / "model.json").string() << '\n';
    return kExitOk;
}

int cmd_probe(const RunConfig& cfg, bool blind) {
    const fs::path out(cfg.output_dir);
    const ToyModel model = load_model((out / "model.json").string());
    const SyntheticData train = load_features_csv((out / "train.csv").string());
    const SyntheticData holdout = load_features_csv((out / "holdout.csv").string());

    ProbeDataset members = predict_proba(model, train.features, "m", &train.labels, true);
    const ProbeDataset holdouts =
        predict_proba(model, holdout.features, "n", &holdout.labels, false);

    ProbeDataset target = members;
    target.records.insert(target.records.end(), holdouts.records.begin(),
                          holdouts.records.end());
    std::mt19937_64 rng(cfg.benchmark.seed);
    std::shuffle(target.records.begin(), target.records.end(), rng);
    if (blind) {
        for (auto& r : target.records) {
            r.is_member.reset();
            r.true_label.reset();
        }
    }

    std::vector<std::vector<double>> random_inputs;
    for (std::size_t i = 0; i < cfg.benchmark.num_random_nonmembers; ++i)
        random_inputs.push_back(
            generate_random(cfg.benchmark.synth.dim, cfg.benchmark.seed * 1000003ull + i)
                .features);
    const ProbeDataset random_probes = predict_proba(model, random_inputs, "g");

    ensure_output_dir(cfg.output_dir);
    save_probe_records(target, (out / "probes.jsonl").string(), cfg.digest);
    save_probe_records(random_probes, (out / "random_probes.jsonl").string(), cfg.digest);
    std::cout << "wrote " << target.size() << " target probes and " << random_probes.size()
              << " random probes\n";
    return kExitOk;
}

std::vector<MembershipPrediction> run_named_attack(const std::string& name,
                                                   const ProbeDataset& target,
                                                   const ProbeDataset& random_probes,
                                                   const RunConfig& cfg,
                                                   std::vector<BatchLog>* logs_out) {
    check_capabilities(name, target);
    if (name == "diff-w/" || name == "diff-w/o" || name == "1class") {
        AttackConfig acfg = cfg.attack;
        acfg.variant = diff_variant_from_string(name);
        // class sweeps regenerate benchmarks with fewer classes than the
        // configured projection width; clamp instead of refusing
        acfg.projection.k = std::min(acfg.projection.k, target.num_classes);
        const AttackResult res = run_variant(acfg.variant, target, random_probes, acfg);
        if (logs_out) *logs_out = res.batch_logs;
        return res.predictions;
    }
    if (name == "top1-threshold")
        return top1_threshold_attack(target, random_probes, cfg.top1_percentile);
    if (attack_needs_shadow(name)) {
        const ShadowArtifacts shadow = build_shadow(cfg.benchmark);
        if (name == "loss-threshold") return loss_threshold_attack(target, shadow);
        ProjectionSpec spec;
        if (name == "nn") spec = {ProjectionKind::SortedAll, 0};
        else if (name == "top3-nn") spec = {ProjectionKind::TopK, 3};
        else spec = {ProjectionKind::TopKPlusTrue, 3};  // top2+true
        return nn_attack(target, shadow, spec, 200, 0.01, cfg.benchmark.seed);
    }
    if (name == "label-only") return label_only_attack(target);
    throw ValidationError("unknown attack: " + name);
}

int cmd_attack(const RunConfig& cfg, const std::string& mode_flag,
               const std::string& record_id) {
    const fs::path out(cfg.output_dir);
    const ProbeDataset target = load_probe_records((out / "probes.jsonl").string());
    const ProbeDataset random_probes =
        load_probe_records((out / "random_probes.jsonl").string());

    const bool incremental = mode_flag == "incremental" ||
                             (mode_flag.empty() && cfg.attack.mode == AttackMode::Incremental);
    if (incremental) {
        if (record_id.empty())
            throw ValidationError("incremental mode needs --record <id>");
        const auto it = std::find_if(target.records.begin(), target.records.end(),
                                     [&](const ProbeRecord& r) { return r.id == record_id; });
        if (it == target.records.end())
            throw ValidationError("record id not found in probe file: " + record_id);

        // batch = the records preceding the target record in file order,
        // capped at batch_size - 1 (the batch it would have joined)
        AttackConfig acfg = cfg.attack;
        const std::size_t cap = acfg.effective_batch_size() - 1;
        ProbeDataset batch;
        batch.num_classes = target.num_classes;
        const std::size_t upto = static_cast<std::size_t>(it - target.records.begin());
        const std::size_t from = upto > cap ? upto - cap : 0;
        batch.records.assign(target.records.begin() + static_cast<std::ptrdiff_t>(from),
                             target.records.begin() + static_cast<std::ptrdiff_t>(upto));
        if (batch.empty()) throw ValidationError("no preceding records to form a batch");

        ProbeDataset nonmem;
        nonmem.num_classes = random_probes.num_classes;
        const std::size_t want =
            std::min(acfg.effective_batch_size(), random_probes.size());
        nonmem.records.assign(random_probes.records.begin(),
                              random_probes.records.begin() + static_cast<std::ptrdiff_t>(want));
        const MembershipPrediction verdict = attack_incremental(
            batch, *it, acfg.variant == DiffVariant::DiffWith ? &nonmem : nullptr, acfg);
        std::cout << verdict.id << ',' << (verdict.predicted_member ? "member" : "nonmember")
                  << '\n';
        return kExitOk;
    }

    ensure_output_dir(cfg.output_dir);
    for (const auto& name : cfg.attacks) {
        std::vector<BatchLog> logs;
        const auto preds = run_named_attack(name, target, random_probes, cfg, &logs);
        const std::string tag = attack_file_tag(name);
        save_predictions(preds, (out / ("predictions_" + tag + ".csv")).string(), cfg.digest);
        if (!logs.empty())
            save_convergence_csv(logs, (out / ("convergence_" + tag + ".csv")).string(),
                                 cfg.digest);
        std::size_t positives = 0;
        for (const auto& p : preds)
            if (p.predicted_member) ++positives;
        std::cout << name << ": " << preds.size() << " predictions, " << positives
                  << " flagged member\n";
    }
    return kExitOk;
}

int cmd_eval(const RunConfig& cfg, const std::string& truth_path) {
    const fs::path out(cfg.output_dir);
    const std::string truth_file =
        truth_path.empty() ? (out / "probes.jsonl").string() : truth_path;
    const ProbeDataset truth = load_probe_records(truth_file);

    std::vector<MetricsReport> reports;
    for (const auto& name : cfg.attacks) {
        const std::string pred_path =
            (out / ("predictions_" + attack_file_tag(name) + ".csv")).string();
        const auto preds = load_predictions(pred_path);
        MetricsReport report = compute_metrics(preds, truth);
        report.variant = name;
        report.config_digest = cfg.digest;
        reports.push_back(report);
        std::cout << name << ": precision " << report.precision << ", recall "
                  << report.recall << ", f1 " << report.f1 << '\n';
    }
    save_metrics_csv(reports, (out / "metrics.csv").string(), cfg.digest);
    return kExitOk;
}

std::vector<NamedAttack> named_attacks(const RunConfig& cfg, const Benchmark& bench) {
    std::vector<NamedAttack> attacks;
    for (const auto& name : cfg.attacks) {
        attacks.push_back({name, [name, &cfg, &bench](const ProbeDataset& target,
                                                      std::uint64_t /*seed*/) {
                               return run_named_attack(name, target, bench.random_probes,
                                                       cfg, nullptr);
                           }});
    }
    return attacks;
}

int cmd_sweep(const RunConfig& cfg, const std::string& kind, int jobs) {
    ensure_output_dir(cfg.output_dir);
    const fs::path out(cfg.output_dir);

    if (kind == "ratio") {
        const Benchmark bench = build_benchmark(cfg.benchmark);
        const auto attacks = named_attacks(cfg, bench);

        // one sweep cell per ratio, run on up to `jobs` threads
        std::vector<std::vector<SweepRow>> cell_rows(cfg.sweep.ratios.size());
        std::vector<std::string> cell_errors(cfg.sweep.ratios.size());
        std::size_t next = 0;
        std::mutex mu;
        auto worker = [&] {
            for (;;) {
                std::size_t i;
                {
                    std::lock_guard<std::mutex> lock(mu);
                    if (next >= cfg.sweep.ratios.size()) return;
                    i = next++;
                }
                SweepConfig cell = cfg.sweep;
                cell.ratios = {cfg.sweep.ratios[i]};
                try {
                    cell_rows[i] = ratio_sweep(attacks, bench.member_probes,
                                               bench.holdout_probes, cell);
                } catch (const std::exception& e) {
                    cell_errors[i] = e.what();
                }
            }
        };
        std::vector<std::thread> pool;
        const std::size_t nthreads = std::min<std::size_t>(
            static_cast<std::size_t>(std::max(jobs, 1)), cfg.sweep.ratios.size());
        for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        for (const auto& err : cell_errors)
            if (!err.empty()) throw ValidationError("sweep cell failed: " + err);

        std::vector<SweepRow> rows;
        for (const auto& cell : cell_rows) rows.insert(rows.end(), cell.begin(), cell.end());
        save_sweep_csv(rows, "ratio", (out / "sweep_ratio.csv").string(), cfg.digest);
        std::cout << "wrote " << rows.size() << " rows to "
                  << (out / "sweep_ratio.csv").string() << '\n';
        return kExitOk;
    }
    if (kind == "class") {
        // the factory regenerates a full benchmark per (m, seed) cell; the
        // attack closures capture per-cell random probes via a shared slot
        struct CellState {
            Benchmark bench;
        };
        auto shared = std::make_shared<CellState>();
        BenchmarkFactory factory = [&cfg, shared](std::size_t m, std::uint64_t seed) {
            BenchmarkConfig bcfg = cfg.benchmark;
            bcfg.synth.num_classes = m;
            bcfg.seed = seed;
            bcfg.synth.seed = seed;
            shared->bench = build_benchmark(bcfg);
            return balanced_target(shared->bench, seed);
        };
        std::vector<NamedAttack> attacks;
        for (const auto& name : cfg.attacks) {
            attacks.push_back({name, [name, &cfg, shared](const ProbeDataset& target,
                                                          std::uint64_t) {
                                   return run_named_attack(name, target,
                                                           shared->bench.random_probes, cfg,
                                                           nullptr);
                               }});
        }
        const auto rows = class_sweep(attacks, factory, cfg.sweep);
        save_sweep_csv(rows, "classes", (out / "sweep_class.csv").string(), cfg.digest);
        std::cout << "wrote " << rows.size() << " rows to "
                  << (out / "sweep_class.csv").string() << '\n';
        return kExitOk;
    }
    throw ValidationError("sweep kind must be 'ratio' or 'class', got: " + kind);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"membership-inference attack toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    CliOptions opts;
    app.add_option("-c,--config", opts.config_path, "experiment config file (TOML-style)");
    app.add_option("--set", opts.overrides, "config override, section.key=value (repeatable)");
    app.add_option("--output-dir", opts.output_dir_flag, "output directory (overrides config)");
    app.add_option("--jobs", opts.jobs, "parallelism degree for sweep cells")
        ->check(CLI::PositiveNumber);

    auto* synth = app.add_subcommand("synth", "generate synthetic train/holdout features");
    auto* train = app.add_subcommand("train", "train the target model on train.csv");
    auto* probe = app.add_subcommand("probe", "probe the model; emit probe JSONL files");
    bool blind = false;
    probe->add_flag("--blind", blind, "strip membership bits and labels from the probe file");
    auto* attack = app.add_subcommand("attack", "run the configured attacks");
    std::string mode_flag, record_id;
    attack->add_option("--mode", mode_flag, "batch or incremental")
        ->check(CLI::IsMember({"batch", "incremental"}));
    attack->add_option("--record", record_id, "record id for incremental mode");
    auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
    std::string truth_path;
    eval->add_option("--truth", truth_path, "labeled probe file (default: probes.jsonl)");
    auto* sweep = app.add_subcommand("sweep", "ratio or class sweep");
    std::string sweep_kind = "ratio";
    sweep->add_option("--kind", sweep_kind, "ratio or class")
        ->check(CLI::IsMember({"ratio", "class"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        const RunConfig cfg = load_run_config(opts);
        if (synth->parsed()) return cmd_synth(cfg);
        if (train->parsed()) return cmd_train(cfg);
        if (probe->parsed()) return cmd_probe(cfg, blind);
        if (attack->parsed()) return cmd_attack(cfg, mode_flag, record_id);
        if (eval->parsed()) return cmd_eval(cfg, truth_path);
        if (sweep->parsed()) return cmd_sweep(cfg, sweep_kind, opts.jobs);
        std::cerr << "no subcommand\n";
        return kExitConfig;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUpstream;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 1;
    }
}
