#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mia/data_model.hpp"
#include "mia/kernels.hpp"
#include "mia/nonmember_gen.hpp"
#include "mia/projection.hpp"

namespace mia {

enum class AttackMode { Batch, Incremental };
enum class DiffVariant { DiffWith, DiffWithout, OneClass };

DiffVariant diff_variant_from_string(const std::string& s);
std::string to_string(DiffVariant v);

struct AttackConfig {
    ProjectionSpec projection;        // default top_k, k=3
    KernelSpec kernel;                // sigma <= 0 means median heuristic at attack start
    std::size_t batch_size = 0;       // 0 = variant default (20 diff-w/, 1000 diff-w/o)
    AttackMode mode = AttackMode::Batch;
    DiffVariant variant = DiffVariant::DiffWith;
    double move_tolerance = 0.0;
    std::size_t max_iterations = 100;
    SeparationSpec separation;        // diff-w/o only
    bool use_median_sigma = true;

    void validate() const;
    std::size_t effective_batch_size() const;
};

// One point in a batch's convergence trajectory.
struct IterationLog {
    std::uint64_t iteration = 0;
    double distance = 0.0;
    std::uint64_t moves_committed = 0;
};

struct DiffOutcome {
    std::vector<std::string> pred_member_ids;
    std::vector<std::string> pred_nonmember_ids;
    std::uint64_t iterations = 0;
    std::uint64_t moves_attempted = 0;
    std::uint64_t moves_committed = 0;
    double wall_time_seconds = 0.0;
    double final_distance = 0.0;
    std::vector<IterationLog> trajectory;
};

// A projected element carrying its record id.
struct ProjectedRecord {
    std::string id;
    std::vector<double> features;
};

// Single-directional differential comparison. Per iteration the distance
// d between nonmember and target sets is frozen; each target element y
// (ascending id) is tested with d' = D(nonmem u {y}, target - {y}).
// Elements with d' >= d + tol join the nonmember side immediately and are
// dropped from the target side when the sweep ends. Stops when a sweep
// commits nothing or after max_iter iterations; survivors are members.
DiffOutcome diff_single(const std::vector<ProjectedRecord>& nonmem,
                        const std::vector<ProjectedRecord>& target,
                        const KernelSpec& kernel, double tol, std::size_t max_iter);

// Bi-directional differential comparison over a roughly divided pair.
// Forward sweep moves part1 -> part2, backward sweep the reverse; the
// running distance is updated on every commit and a move that would empty
// a side is skipped. The side with the higher mean top-1 probability is
// declared the member side.
DiffOutcome diff_bi(const std::vector<ProjectedRecord>& part1,
                    const std::vector<ProjectedRecord>& part2,
                    const KernelSpec& kernel, double tol, std::size_t max_iter);

enum class Side { A, B };

// Side with the strictly greater mean first coordinate; ties go to A with
// a warning on stderr.
Side decide_member_side(const std::vector<std::vector<double>>& set_a,
                        const std::vector<std::vector<double>>& set_b);

struct BatchLog {
    std::size_t batch_index = 0;
    DiffOutcome outcome;
};

struct AttackResult {
    std::vector<MembershipPrediction> predictions;
    std::vector<BatchLog> batch_logs;
};

// Batched attack over the target dataset. diff-w/ runs diff_single per
// batch against a fresh copy of the projected nonmember set; diff-w/o
// splits each batch with rough_separation and runs diff_bi.
AttackResult attack_batched(const ProbeDataset& target, const ProbeDataset* nonmem,
                            const AttackConfig& config);

// Incremental mode: verdict for one new record appended to a previously
// processed batch; equals the batch-mode verdict under the same batch
// composition.
MembershipPrediction attack_incremental(const ProbeDataset& batch, const ProbeRecord& record,
                                        const ProbeDataset* nonmem,
                                        const AttackConfig& config);

}  // namespace mia
