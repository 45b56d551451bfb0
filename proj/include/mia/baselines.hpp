#pragma once

#include <cstdint>
#include <vector>

#include "mia/data_model.hpp"
#include "mia/projection.hpp"
#include "mia/toy_models.hpp"

namespace mia {

// Labeled output distributions from an attacker-trained shadow model, plus
// the loss-threshold statistic.
struct ShadowArtifacts {
    ProbeDataset member_probes;
    ProbeDataset nonmember_probes;
    double avg_train_loss = 0.0;
};

// Member iff top-1 probability strictly exceeds the given percentile of
// the reference (generated-sample) top-1 scores.
std::vector<MembershipPrediction> top1_threshold_attack(const ProbeDataset& target,
                                                        const ProbeDataset& reference_probes,
                                                        double percentile = 90.0);

// Member iff -ln(p_true) < shadow average train loss; p_true floored at
// 1e-12. Requires true labels.
std::vector<MembershipPrediction> loss_threshold_attack(const ProbeDataset& target,
                                                        const ShadowArtifacts& shadow);

// Member iff argmax(probs) == true_label (ties to the lowest class index).
std::vector<MembershipPrediction> label_only_attack(const ProbeDataset& target);

// Binary classifier (one hidden layer of 64 units) trained on projected
// shadow member/nonmember outputs; covers the NN (sorted_all), Top3-NN
// (top_k k=3) and Top2+True baselines via feature_spec.
std::vector<MembershipPrediction> nn_attack(const ProbeDataset& target,
                                            const ShadowArtifacts& shadow,
                                            const ProjectionSpec& feature_spec,
                                            std::size_t epochs = 200, double lr = 0.01,
                                            std::uint64_t seed = 0);

}  // namespace mia
