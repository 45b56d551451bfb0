#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mia/data_model.hpp"
#include "mia/diff_attack.hpp"

namespace mia {

struct MetricsReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::string variant;
    std::string config_digest;
};

// Confusion-matrix metrics with member as the positive class. Ground truth
// comes from the dataset's is_member bits; every prediction id must be
// present and labeled.
MetricsReport compute_metrics(const std::vector<MembershipPrediction>& preds,
                              const ProbeDataset& ground_truth);

struct MannWhitneyResult {
    double u = 0.0;        // min(U_A, U_B)
    double p_value = 0.0;  // two-sided
};

// Two-sided Mann-Whitney U with mid-rank ties. Exact enumeration over all
// group assignments for n1, n2 <= 8; normal approximation with tie
// correction and continuity correction otherwise.
MannWhitneyResult mann_whitney_u(const std::vector<double>& sample_a,
                                 const std::vector<double>& sample_b);

// An attack as the sweeps see it: target dataset in, predictions out. The
// seed feeds any internal randomness; the target's is_member bits are for
// scoring only and arrive stripped.
using AttackFn = std::function<std::vector<MembershipPrediction>(const ProbeDataset& target,
                                                                 std::uint64_t seed)>;

struct NamedAttack {
    std::string name;
    AttackFn run;
};

struct SweepRow {
    double x = 0.0;  // ratio r or class count m
    std::string attack;
    double f1_mean = 0.0;
    double f1_sem = 0.0;
    std::size_t seeds = 0;
};

struct SweepConfig {
    std::vector<double> ratios;       // nonmember-to-member ratios, each >= 1
    std::vector<std::size_t> class_counts;
    std::vector<std::uint64_t> seeds;

    void validate() const;
};

// For each ratio r, composes a target of one member per r nonmembers from
// the labeled pools (members first, subsampled deterministically per
// seed), runs each attack, and aggregates F1 over seeds.
std::vector<SweepRow> ratio_sweep(const std::vector<NamedAttack>& attacks,
                                  const ProbeDataset& member_pool,
                                  const ProbeDataset& nonmember_pool,
                                  const SweepConfig& config);

// A benchmark factory regenerates the synthetic benchmark for a class
// count and seed, returning a labeled balanced target dataset.
using BenchmarkFactory =
    std::function<ProbeDataset(std::size_t num_classes, std::uint64_t seed)>;

std::vector<SweepRow> class_sweep(const std::vector<NamedAttack>& attacks,
                                  const BenchmarkFactory& factory, const SweepConfig& config);

void save_sweep_csv(const std::vector<SweepRow>& rows, const std::string& x_name,
                    const std::string& path, const std::string& digest = "");

struct ConvergenceTotals {
    std::uint64_t total_iterations = 0;
    std::uint64_t total_moves_attempted = 0;
    std::uint64_t total_moves_committed = 0;
    double total_wall_time_seconds = 0.0;
};

ConvergenceTotals convergence_totals(const std::vector<BatchLog>& logs);

// Per-batch distance/move trajectories plus a totals row.
void save_convergence_csv(const std::vector<BatchLog>& logs, const std::string& path,
                          const std::string& digest = "");

void save_metrics_csv(const std::vector<MetricsReport>& reports, const std::string& path,
                      const std::string& digest = "");

// Strips is_member (and nothing else) so attacks cannot peek at ground
// truth.
ProbeDataset strip_membership(const ProbeDataset& ds);

}  // namespace mia
