#include "mia/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mia/nonmember_gen.hpp"

namespace mia {

BenchmarkConfig BenchmarkConfig::standard(std::uint64_t seed) {
    BenchmarkConfig cfg;
    cfg.synth = standard_benchmark_spec(seed);
    cfg.arch = Architecture::Mlp;
    cfg.epochs = 2000;
    cfg.learning_rate = 1.0;
    cfg.num_random_nonmembers = 1000;
    cfg.seed = seed;
    return cfg;
}

Benchmark build_benchmark(const BenchmarkConfig& config) {
    // train set and an equal-size held-out set from the same distribution
    SyntheticSpec train_spec = config.synth;
    train_spec.seed = config.seed;
    SyntheticSpec holdout_spec = config.synth;
    holdout_spec.seed = config.seed + 0x9e3779b97f4a7c15ull;

    const SyntheticData train = make_synthetic_dataset(train_spec);
    const SyntheticData holdout = make_synthetic_dataset(holdout_spec);

    Benchmark bench;
    bench.model = train_model(train.features, train.labels, config.arch, config.epochs,
                              config.learning_rate, config.seed);
    bench.train_accuracy = bench.model.final_train_accuracy;
    bench.holdout_accuracy = accuracy(bench.model, holdout.features, holdout.labels);

    bench.member_probes = predict_proba(bench.model, train.features, "m", &train.labels, true);
    bench.holdout_probes =
        predict_proba(bench.model, holdout.features, "n", &holdout.labels, false);

    std::vector<std::vector<double>> random_inputs;
    random_inputs.reserve(config.num_random_nonmembers);
    for (std::size_t i = 0; i < config.num_random_nonmembers; ++i)
        random_inputs.push_back(
            generate_random(config.synth.dim, config.seed * 1000003ull + i).features);
    bench.random_probes = predict_proba(bench.model, random_inputs, "g");
    return bench;
}

ProbeDataset balanced_target(const Benchmark& bench, std::uint64_t seed) {
    ProbeDataset target;
    target.num_classes = bench.member_probes.num_classes;
    target.records = bench.member_probes.records;
    target.records.insert(target.records.end(), bench.holdout_probes.records.begin(),
                          bench.holdout_probes.records.end());
    std::mt19937_64 rng(seed);
    std::shuffle(target.records.begin(), target.records.end(), rng);
    return target;
}

std::vector<MembershipPrediction> run_one_class(const ProbeDataset& target,
                                                const ProbeDataset& random_probes,
                                                const ProjectionSpec& projection,
                                                double nu) {
    const auto train_proj = project_all(blind_view(random_probes), projection);
    KernelSpec kernel;
    kernel.sigma = median_heuristic_sigma(train_proj);
    const OneClassModel model = train_one_class(train_proj, kernel, nu);

    std::vector<OneClassInput> inputs;
    inputs.reserve(target.size());
    for (const auto& r : blind_view(target))
        inputs.push_back({*r.id, project(*r.probs, r.true_label, projection)});
    return classify_one_class(model, inputs);
}

AttackResult run_variant(DiffVariant variant, const ProbeDataset& target,
                         const ProbeDataset& random_probes, const AttackConfig& config) {
    AttackConfig cfg = config;
    cfg.variant = variant;
    switch (variant) {
        case DiffVariant::DiffWith: {
            // nonmember set sized to match the batch (default 20)
            ProbeDataset nonmem;
            nonmem.num_classes = random_probes.num_classes;
            const std::size_t want = std::min(cfg.effective_batch_size(),
                                              random_probes.size());
            nonmem.records.assign(random_probes.records.begin(),
                                  random_probes.records.begin() + want);
            return attack_batched(target, &nonmem, cfg);
        }
        case DiffVariant::DiffWithout:
            return attack_batched(target, nullptr, cfg);
        case DiffVariant::OneClass: {
            AttackResult result;
            result.predictions = run_one_class(target, random_probes, cfg.projection);
            return result;
        }
    }
    throw ValidationError("run_variant: bad variant");
}

ShadowArtifacts build_shadow(const BenchmarkConfig& config) {
    BenchmarkConfig shadow_cfg = config;
    shadow_cfg.seed = config.seed + 0x5851f42d4c957f2dull;
    shadow_cfg.synth.seed = shadow_cfg.seed;
    const Benchmark shadow = build_benchmark(shadow_cfg);

    ShadowArtifacts art;
    art.member_probes = shadow.member_probes;
    art.nonmember_probes = shadow.holdout_probes;
    for (auto& r : art.member_probes.records) r.id = "sm" + r.id;
    for (auto& r : art.nonmember_probes.records) r.id = "sn" + r.id;

    double loss = 0.0;
    for (const auto& r : art.member_probes.records)
        loss += -std::log(std::max(r.probs[static_cast<std::size_t>(*r.true_label)], 1e-12));
    art.avg_train_loss = loss / static_cast<double>(art.member_probes.size());
    return art;
}

}  // namespace mia
