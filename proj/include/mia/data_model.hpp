#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mia/error.hpp"

namespace mia {

inline constexpr double kProbSumTolerance = 1e-6;

// One probed sample: the model's output probability vector plus optional
// ground-truth label and membership bit. is_member exists for evaluation
// only; attack code never sees it (see BlindRecord).
struct ProbeRecord {
    std::string id;
    std::vector<double> probs;
    std::optional<int> true_label;
    std::optional<bool> is_member;
};

struct ProbeDataset {
    std::vector<ProbeRecord> records;
    std::size_t num_classes = 0;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

// Attack-facing view of a record: no membership bit.
struct BlindRecord {
    const std::string* id;
    const std::vector<double>* probs;
    std::optional<int> true_label;
};

std::vector<BlindRecord> blind_view(const ProbeDataset& ds);

struct MembershipPrediction {
    std::string id;
    bool predicted_member = false;
    std::string variant;
    std::uint64_t iterations = 0;
    std::uint64_t moves = 0;
};

// Throws ValidationError if the record violates the probability-simplex
// invariants (non-empty probs, entries in [0,1], sum within 1e-6 of 1,
// true_label in range).
void validate_record(const ProbeRecord& rec);

// Validates all records, dimension agreement, and id uniqueness.
void validate_dataset(const ProbeDataset& ds);

// Reads a JSON-Lines probe file. Lines holding a "_meta" object are
// skipped. Errors carry the 1-based line number.
ProbeDataset load_probe_records(const std::string& path,
                                std::optional<std::size_t> expected_classes = std::nullopt);

// Writes a probe dataset as JSON-Lines. If digest is non-empty it is
// recorded in a leading {"_meta": ...} line.
void save_probe_records(const ProbeDataset& ds, const std::string& path,
                        const std::string& digest = "");

// CSV with header id,predicted_member,variant. Lines starting with '#'
// are comments (used for the config digest).
void save_predictions(const std::vector<MembershipPrediction>& preds,
                      const std::string& path, const std::string& digest = "");
std::vector<MembershipPrediction> load_predictions(const std::string& path);

}  // namespace mia
