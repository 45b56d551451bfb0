#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mia/data_model.hpp"

namespace mia {

struct SyntheticSpec {
    std::size_t num_classes = 10;
    std::size_t dim = 20;
    std::size_t samples_per_class = 100;
    double cluster_spread = 0.15;
    double label_noise = 0.0;  // fraction of labels resampled to a different class
    std::uint64_t seed = 0;

    void validate() const;
};

// The frozen desk-scale benchmark: overfits hard enough that membership
// signal exists (train/holdout accuracy gap >= 0.2 with the standard
// trainer settings).
SyntheticSpec standard_benchmark_spec(std::uint64_t seed);

struct SyntheticData {
    std::vector<std::vector<double>> features;
    std::vector<int> labels;
};

// Gaussian class clusters with means uniform in [0,1]^dim; label_noise of
// the labels are reassigned uniformly among the other classes.
SyntheticData make_synthetic_dataset(const SyntheticSpec& spec);

enum class Architecture { Softmax, Mlp };
Architecture architecture_from_string(const std::string& s);
std::string to_string(Architecture a);

inline constexpr std::size_t kMlpHiddenUnits = 64;

// Softmax classifier, optionally with one tanh hidden layer of 64 units.
// Trained by full-batch gradient descent on cross-entropy; everything is
// seeded, so results are reproducible.
struct ToyModel {
    Architecture arch = Architecture::Softmax;
    std::size_t dim = 0;
    std::size_t num_classes = 0;
    // Softmax: w1 is num_classes x dim, b1 length num_classes, w2/b2 empty.
    // Mlp: w1 hidden x dim, b1 hidden, w2 num_classes x hidden, b2 num_classes.
    std::vector<std::vector<double>> w1, w2;
    std::vector<double> b1, b2;
    std::size_t epochs = 0;
    double learning_rate = 0.0;
    double final_train_accuracy = 0.0;
};

ToyModel train_model(const std::vector<std::vector<double>>& features,
                     const std::vector<int>& labels, Architecture arch,
                     std::size_t epochs, double lr, std::uint64_t seed);

// Forward pass for one sample; output lies on the probability simplex.
std::vector<double> predict_one(const ToyModel& model, const std::vector<double>& x);

// Probes a feature set through the model. Ids are id_prefix + running
// index. Labels and membership bits are attached when provided (the CLI's
// blind mode simply does not pass them).
ProbeDataset predict_proba(const ToyModel& model,
                           const std::vector<std::vector<double>>& features,
                           const std::string& id_prefix = "r",
                           const std::vector<int>* labels = nullptr,
                           std::optional<bool> is_member = std::nullopt);

// Mean cross-entropy of the model on a labeled set.
double cross_entropy(const ToyModel& model, const std::vector<std::vector<double>>& features,
                     const std::vector<int>& labels);
double accuracy(const ToyModel& model, const std::vector<std::vector<double>>& features,
                const std::vector<int>& labels);

void save_model(const ToyModel& model, const std::string& path, const std::string& digest = "");
ToyModel load_model(const std::string& path);

// Cross-entropy loss and gradient w.r.t. logits for one sample; exposed so
// the finite-difference check can target exactly what training uses.
double softmax_xent(const std::vector<double>& logits, int label,
                    std::vector<double>* grad_logits);

}  // namespace mia
