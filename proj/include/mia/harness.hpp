#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mia/baselines.hpp"
#include "mia/data_model.hpp"
#include "mia/diff_attack.hpp"
#include "mia/oneclass.hpp"
#include "mia/toy_models.hpp"

namespace mia {

// End-to-end desk-scale experiment plumbing: synthesize, train, probe,
// and run any attack variant against the result.
struct BenchmarkConfig {
    SyntheticSpec synth;
    Architecture arch = Architecture::Mlp;
    std::size_t epochs = 2000;
    double learning_rate = 1.0;
    std::size_t num_random_nonmembers = 1000;
    std::uint64_t seed = 0;

    static BenchmarkConfig standard(std::uint64_t seed);
};

struct Benchmark {
    ToyModel model;
    ProbeDataset member_probes;    // training samples, is_member = true, ids m<i>
    ProbeDataset holdout_probes;   // held-out samples, is_member = false, ids n<i>
    ProbeDataset random_probes;    // uniform-random inputs probed, ids g<i>
    double train_accuracy = 0.0;
    double holdout_accuracy = 0.0;
};

Benchmark build_benchmark(const BenchmarkConfig& config);

// Balanced member/holdout target, shuffled deterministically by seed.
ProbeDataset balanced_target(const Benchmark& bench, std::uint64_t seed);

// Runs one diff variant or the 1class attack over the (blind) target,
// using the benchmark's generated nonmembers where the variant needs
// them. Returns predictions plus per-batch convergence logs (empty for
// 1class).
AttackResult run_variant(DiffVariant variant, const ProbeDataset& target,
                         const ProbeDataset& random_probes, const AttackConfig& config);

// The 1class pipeline by itself: train on projected generated nonmembers,
// classify the target.
std::vector<MembershipPrediction> run_one_class(const ProbeDataset& target,
                                                const ProbeDataset& random_probes,
                                                const ProjectionSpec& projection,
                                                double nu = 0.1);

// Shadow-model artifacts built from an independently trained model on
// fresh synthetic data (same spec, different seed).
ShadowArtifacts build_shadow(const BenchmarkConfig& config);

}  // namespace mia
