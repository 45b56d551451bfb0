#include "mia/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace mia {

namespace {

double top1(const ProbeRecord& rec) {
    return *std::max_element(rec.probs.begin(), rec.probs.end());
}

// Linear-interpolated percentile over a copy of the values.
double percentile_of(std::vector<double> values, double pct) {
    std::sort(values.begin(), values.end());
    const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

std::vector<MembershipPrediction> top1_threshold_attack(const ProbeDataset& target,
                                                        const ProbeDataset& reference_probes,
                                                        double percentile) {
    if (reference_probes.empty())
        throw ValidationError("top1_threshold_attack: empty reference set");
    if (!(percentile > 0.0 && percentile <= 100.0))
        throw ValidationError("top1_threshold_attack: percentile must be in (0,100]");

    std::vector<double> ref_scores;
    ref_scores.reserve(reference_probes.size());
    for (const auto& r : reference_probes.records) ref_scores.push_back(top1(r));
    const double threshold = percentile_of(std::move(ref_scores), percentile);

    std::vector<MembershipPrediction> preds;
    preds.reserve(target.size());
    for (const auto& r : target.records)
        preds.push_back({r.id, top1(r) > threshold, "top1-threshold", 0, 0});
    return preds;
}

std::vector<MembershipPrediction> loss_threshold_attack(const ProbeDataset& target,
                                                        const ShadowArtifacts& shadow) {
    std::vector<MembershipPrediction> preds;
    preds.reserve(target.size());
    for (const auto& r : target.records) {
        if (!r.true_label)
            throw ValidationError("loss_threshold_attack: record '" + r.id +
                                  "' lacks true_label");
        const double p = std::max(r.probs[static_cast<std::size_t>(*r.true_label)], 1e-12);
        const double loss = -std::log(p);
        preds.push_back({r.id, loss < shadow.avg_train_loss, "loss-threshold", 0, 0});
    }
    return preds;
}

std::vector<MembershipPrediction> label_only_attack(const ProbeDataset& target) {
    std::vector<MembershipPrediction> preds;
    preds.reserve(target.size());
    for (const auto& r : target.records) {
        if (!r.true_label)
            throw ValidationError("label_only_attack: record '" + r.id + "' lacks true_label");
        const auto it = std::max_element(r.probs.begin(), r.probs.end());
        const int argmax = static_cast<int>(it - r.probs.begin());
        preds.push_back({r.id, argmax == *r.true_label, "label-only", 0, 0});
    }
    return preds;
}

std::vector<MembershipPrediction> nn_attack(const ProbeDataset& target,
                                            const ShadowArtifacts& shadow,
                                            const ProjectionSpec& feature_spec,
                                            std::size_t epochs, double lr,
                                            std::uint64_t seed) {
    if (shadow.member_probes.size() < 50 || shadow.nonmember_probes.size() < 50)
        throw ValidationError("nn_attack: shadow sets must have >= 50 records each");

    std::vector<std::vector<double>> features;
    std::vector<int> labels;
    for (const auto& r : blind_view(shadow.member_probes)) {
        features.push_back(project(*r.probs, r.true_label, feature_spec));
        labels.push_back(1);
    }
    for (const auto& r : blind_view(shadow.nonmember_probes)) {
        features.push_back(project(*r.probs, r.true_label, feature_spec));
        labels.push_back(0);
    }

    const ToyModel clf = train_model(features, labels, Architecture::Mlp, epochs, lr, seed);

    std::string variant = "nn";
    if (feature_spec.kind == ProjectionKind::TopK) variant = "top3-nn";
    else if (feature_spec.kind == ProjectionKind::TopKPlusTrue) variant = "top2+true";

    std::vector<MembershipPrediction> preds;
    preds.reserve(target.size());
    for (const auto& r : blind_view(target)) {
        const auto x = project(*r.probs, r.true_label, feature_spec);
        const auto p = predict_one(clf, x);
        preds.push_back({*r.id, p[1] > 0.5, variant, 0, 0});
    }
    return preds;
}

}  // namespace mia
