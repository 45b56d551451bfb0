#include "mia/toy_models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "mia/simd.hpp"

namespace mia {

using nlohmann::json;

void SyntheticSpec::validate() const {
    if (num_classes < 2) throw ValidationError("synthetic spec: need >= 2 classes");
    if (dim == 0 || samples_per_class == 0) throw ValidationError("synthetic spec: empty shape");
    if (!(cluster_spread > 0.0)) throw ValidationError("synthetic spec: spread must be positive");
    if (label_noise < 0.0 || label_noise >= 0.5)
        throw ValidationError("synthetic spec: label_noise must be in [0, 0.5)");
}

SyntheticSpec standard_benchmark_spec(std::uint64_t seed) {
    SyntheticSpec spec;
    spec.num_classes = 10;
    spec.dim = 20;
    spec.samples_per_class = 100;
    spec.cluster_spread = 0.7;
    spec.label_noise = 0.3;
    spec.seed = seed;
    return spec;
}

SyntheticData make_synthetic_dataset(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, spec.cluster_spread);

    std::vector<std::vector<double>> means(spec.num_classes, std::vector<double>(spec.dim));
    for (auto& m : means)
        for (double& v : m) v = unif(rng);

    SyntheticData data;
    const std::size_t n = spec.num_classes * spec.samples_per_class;
    data.features.reserve(n);
    data.labels.reserve(n);
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
        for (std::size_t s = 0; s < spec.samples_per_class; ++s) {
            std::vector<double> x(spec.dim);
            for (std::size_t d = 0; d < spec.dim; ++d) x[d] = means[c][d] + gauss(rng);
            data.features.push_back(std::move(x));
            data.labels.push_back(static_cast<int>(c));
        }
    }
    // Resample the noisy fraction to a different class, chosen uniformly.
    if (spec.label_noise > 0.0) {
        std::uniform_int_distribution<int> other(0, static_cast<int>(spec.num_classes) - 2);
        for (std::size_t i = 0; i < n; ++i) {
            if (unif(rng) < spec.label_noise) {
                int k = other(rng);
                if (k >= data.labels[i]) ++k;
                data.labels[i] = k;
            }
        }
    }
    return data;
}

Architecture architecture_from_string(const std::string& s) {
    if (s == "softmax") return Architecture::Softmax;
    if (s == "mlp") return Architecture::Mlp;
    throw ValidationError("unknown architecture: " + s);
}

std::string to_string(Architecture a) {
    return a == Architecture::Softmax ? "softmax" : "mlp";
}

double softmax_xent(const std::vector<double>& logits, int label,
                    std::vector<double>* grad_logits) {
    const std::size_t m = logits.size();
    const double zmax = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double z : logits) denom += std::exp(z - zmax);
    const double log_denom = std::log(denom) + zmax;
    const double loss = log_denom - logits[static_cast<std::size_t>(label)];
    if (grad_logits) {
        grad_logits->resize(m);
        for (std::size_t j = 0; j < m; ++j)
            (*grad_logits)[j] = std::exp(logits[j] - log_denom);
        (*grad_logits)[static_cast<std::size_t>(label)] -= 1.0;
    }
    return loss;
}

namespace {

std::vector<double> softmax(std::vector<double> z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    double denom = 0.0;
    for (double& v : z) {
        v = std::exp(v - zmax);
        denom += v;
    }
    for (double& v : z) v /= denom;
    return z;
}

struct Forward {
    std::vector<double> hidden;  // post-tanh (mlp only)
    std::vector<double> logits;
};

Forward forward(const ToyModel& m, const std::vector<double>& x) {
    Forward f;
    if (m.arch == Architecture::Softmax) {
        f.logits.resize(m.num_classes);
        for (std::size_t c = 0; c < m.num_classes; ++c)
            f.logits[c] = simd::dot(m.w1[c].data(), x.data(), x.size()) + m.b1[c];
    } else {
        const std::size_t h = m.w1.size();
        f.hidden.resize(h);
        for (std::size_t j = 0; j < h; ++j)
            f.hidden[j] = std::tanh(simd::dot(m.w1[j].data(), x.data(), x.size()) + m.b1[j]);
        f.logits.resize(m.num_classes);
        for (std::size_t c = 0; c < m.num_classes; ++c)
            f.logits[c] = simd::dot(m.w2[c].data(), f.hidden.data(), h) + m.b2[c];
    }
    return f;
}

}  // namespace

ToyModel train_model(const std::vector<std::vector<double>>& features,
                     const std::vector<int>& labels, Architecture arch,
                     std::size_t epochs, double lr, std::uint64_t seed) {
    if (features.empty() || features.size() != labels.size())
        throw ValidationError("train_model: empty or mismatched inputs");
    const std::size_t n = features.size();
    const std::size_t dim = features[0].size();
    const int max_label = *std::max_element(labels.begin(), labels.end());
    const std::size_t m = static_cast<std::size_t>(max_label) + 1;
    if (m < 2) throw ValidationError("train_model: need >= 2 classes present");

    ToyModel model;
    model.arch = arch;
    model.dim = dim;
    model.num_classes = m;
    model.epochs = epochs;
    model.learning_rate = lr;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> init(0.0, 0.1);
    const std::size_t h = (arch == Architecture::Mlp) ? kMlpHiddenUnits : 0;
    if (arch == Architecture::Softmax) {
        model.w1.assign(m, std::vector<double>(dim));
        model.b1.assign(m, 0.0);
        for (auto& row : model.w1)
            for (double& v : row) v = init(rng);
    } else {
        model.w1.assign(h, std::vector<double>(dim));
        model.b1.assign(h, 0.0);
        model.w2.assign(m, std::vector<double>(h));
        model.b2.assign(m, 0.0);
        for (auto& row : model.w1)
            for (double& v : row) v = init(rng);
        for (auto& row : model.w2)
            for (double& v : row) v = init(rng);
    }

    const double scale = lr / static_cast<double>(n);
    std::vector<double> glog;
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        // full-batch gradient accumulation
        std::vector<std::vector<double>> gw1(model.w1.size(),
                                             std::vector<double>(dim, 0.0));
        std::vector<double> gb1(model.b1.size(), 0.0);
        std::vector<std::vector<double>> gw2(model.w2.size(),
                                             std::vector<double>(h, 0.0));
        std::vector<double> gb2(model.b2.size(), 0.0);
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Forward f = forward(model, features[i]);
            loss += softmax_xent(f.logits, labels[i], &glog);
            if (arch == Architecture::Softmax) {
                for (std::size_t c = 0; c < m; ++c) {
                    simd::axpy(gw1[c].data(), features[i].data(), glog[c], dim);
                    gb1[c] += glog[c];
                }
            } else {
                std::vector<double> ghid(h, 0.0);
                for (std::size_t c = 0; c < m; ++c) {
                    simd::axpy(gw2[c].data(), f.hidden.data(), glog[c], h);
                    gb2[c] += glog[c];
                    simd::axpy(ghid.data(), model.w2[c].data(), glog[c], h);
                }
                for (std::size_t j = 0; j < h; ++j) {
                    const double g = ghid[j] * (1.0 - f.hidden[j] * f.hidden[j]);
                    simd::axpy(gw1[j].data(), features[i].data(), g, dim);
                    gb1[j] += g;
                }
            }
        }
        if (!std::isfinite(loss))
            throw NumericalError("train_model: loss diverged at epoch " +
                                 std::to_string(epoch));
        for (std::size_t r = 0; r < model.w1.size(); ++r) {
            simd::axpy(model.w1[r].data(), gw1[r].data(), -scale, dim);
            model.b1[r] -= scale * gb1[r];
        }
        for (std::size_t r = 0; r < model.w2.size(); ++r) {
            simd::axpy(model.w2[r].data(), gw2[r].data(), -scale, h);
            model.b2[r] -= scale * gb2[r];
        }
    }

    model.final_train_accuracy = accuracy(model, features, labels);
    return model;
}

std::vector<double> predict_one(const ToyModel& model, const std::vector<double>& x) {
    if (x.size() != model.dim)
        throw ValidationError("predict: feature dimension " + std::to_string(x.size()) +
                              " != model dimension " + std::to_string(model.dim));
    return softmax(forward(model, x).logits);
}

ProbeDataset predict_proba(const ToyModel& model,
                           const std::vector<std::vector<double>>& features,
                           const std::string& id_prefix, const std::vector<int>* labels,
                           std::optional<bool> is_member) {
    if (labels && labels->size() != features.size())
        throw ValidationError("predict_proba: labels size mismatch");
    ProbeDataset ds;
    ds.num_classes = model.num_classes;
    ds.records.reserve(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        ProbeRecord rec;
        rec.id = id_prefix + std::to_string(i);
        rec.probs = predict_one(model, features[i]);
        if (labels) rec.true_label = (*labels)[i];
        rec.is_member = is_member;
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

double cross_entropy(const ToyModel& model, const std::vector<std::vector<double>>& features,
                     const std::vector<int>& labels) {
    double loss = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i)
        loss += softmax_xent(forward(model, features[i]).logits, labels[i], nullptr);
    return loss / static_cast<double>(features.size());
}

double accuracy(const ToyModel& model, const std::vector<std::vector<double>>& features,
                const std::vector<int>& labels) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto f = forward(model, features[i]);
        const auto it = std::max_element(f.logits.begin(), f.logits.end());
        if (static_cast<int>(it - f.logits.begin()) == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(features.size());
}

void save_model(const ToyModel& model, const std::string& path, const std::string& digest) {
    json j{{"arch", to_string(model.arch)},
           {"dim", model.dim},
           {"num_classes", model.num_classes},
           {"w1", model.w1},
           {"b1", model.b1},
           {"w2", model.w2},
           {"b2", model.b2},
           {"epochs", model.epochs},
           {"learning_rate", model.learning_rate},
           {"final_train_accuracy", model.final_train_accuracy}};
    if (!digest.empty()) j["config_digest"] = digest;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

ToyModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
    ToyModel model;
    try {
        model.arch = architecture_from_string(j.at("arch").get<std::string>());
        model.dim = j.at("dim").get<std::size_t>();
        model.num_classes = j.at("num_classes").get<std::size_t>();
        model.w1 = j.at("w1").get<std::vector<std::vector<double>>>();
        model.b1 = j.at("b1").get<std::vector<double>>();
        model.w2 = j.at("w2").get<std::vector<std::vector<double>>>();
        model.b2 = j.at("b2").get<std::vector<double>>();
        model.epochs = j.at("epochs").get<std::size_t>();
        model.learning_rate = j.at("learning_rate").get<double>();
        model.final_train_accuracy = j.at("final_train_accuracy").get<double>();
    } catch (const json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return model;
}

}  // namespace mia
