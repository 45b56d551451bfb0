#include "mia/oneclass.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace mia {

using nlohmann::json;

double OneClassModel::decision(const Vec& x) const {
    if (!support_vectors.empty() && x.size() != support_vectors[0].size())
        throw ValidationError("one-class decision: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < support_vectors.size(); ++i)
        acc += coefficients[i] * kernel_eval(support_vectors[i], x, kernel);
    return acc - rho;
}

OneClassModel train_one_class(const std::vector<Vec>& nonmem_projected,
                              const KernelSpec& kernel, double nu) {
    const std::size_t n = nonmem_projected.size();
    if (n < 10) throw ValidationError("train_one_class: need >= 10 training vectors");
    if (!(nu > 0.0 && nu < 1.0)) throw ValidationError("train_one_class: nu must be in (0,1)");
    kernel.validate();

    const double c = 1.0 / (nu * static_cast<double>(n));

    // Dense Gram cache.
    std::vector<double> q(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        q[i * n + i] = kernel_eval(nonmem_projected[i], nonmem_projected[i], kernel);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double k = kernel_eval(nonmem_projected[i], nonmem_projected[j], kernel);
            q[i * n + j] = k;
            q[j * n + i] = k;
        }
    }

    // Feasible start: spread mass uniformly (1/n <= C always).
    std::vector<double> alpha(n, 1.0 / static_cast<double>(n));
    std::vector<double> grad(n, 0.0);  // (Q alpha)_i
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += q[i * n + j] * alpha[j];
        grad[i] = acc;
    }

    constexpr double kKktTol = 1e-4;
    constexpr std::size_t kMaxUpdates = 100000;
    constexpr double kBoundEps = 1e-12;

    double low = 0.0, high = 0.0;
    bool converged = false;
    for (std::size_t update = 0; update < kMaxUpdates; ++update) {
        // most violating pair
        std::size_t i = n, j = n;
        low = std::numeric_limits<double>::infinity();
        high = -std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < n; ++p) {
            if (alpha[p] < c - kBoundEps && grad[p] < low) {
                low = grad[p];
                i = p;
            }
            if (alpha[p] > kBoundEps && grad[p] > high) {
                high = grad[p];
                j = p;
            }
        }
        if (i == n || j == n || high - low <= kKktTol) {
            converged = true;
            break;
        }

        const double eta = q[i * n + i] + q[j * n + j] - 2.0 * q[i * n + j];
        double delta = (eta > kBoundEps) ? (high - low) / eta
                                         : std::numeric_limits<double>::infinity();
        delta = std::min({delta, c - alpha[i], alpha[j]});
        if (delta <= 0.0) {
            converged = true;  // no feasible progress left
            break;
        }
        alpha[i] += delta;
        alpha[j] -= delta;
        for (std::size_t p = 0; p < n; ++p)
            grad[p] += delta * (q[p * n + i] - q[p * n + j]);
    }
    if (!converged)
        throw NumericalError("train_one_class: SMO did not reach KKT tolerance " +
                             std::to_string(kKktTol) + " within update cap (gap " +
                             std::to_string(high - low) + ")");

    // rho: average gradient over free vectors, else midpoint of the bounds.
    double rho = 0.0;
    std::size_t free_count = 0;
    for (std::size_t p = 0; p < n; ++p) {
        if (alpha[p] > kBoundEps && alpha[p] < c - kBoundEps) {
            rho += grad[p];
            ++free_count;
        }
    }
    if (free_count > 0) {
        rho /= static_cast<double>(free_count);
    } else {
        rho = 0.5 * (low + high);
        if (!std::isfinite(rho)) rho = 0.0;
    }

    OneClassModel model;
    model.kernel = kernel;
    model.nu = nu;
    model.rho = rho;
    for (std::size_t p = 0; p < n; ++p) {
        if (alpha[p] > kBoundEps) {
            model.support_vectors.push_back(nonmem_projected[p]);
            model.coefficients.push_back(alpha[p]);
        }
    }
    return model;
}

std::vector<MembershipPrediction> classify_one_class(const OneClassModel& model,
                                                     const std::vector<OneClassInput>& targets) {
    std::vector<MembershipPrediction> preds;
    preds.reserve(targets.size());
    for (const auto& t : targets) {
        MembershipPrediction p;
        p.id = t.id;
        p.predicted_member = model.decision(t.features) < 0.0;
        p.variant = "1class";
        preds.push_back(std::move(p));
    }
    return preds;
}

void save_one_class(const OneClassModel& model, const std::string& path,
                    const std::string& digest) {
    json j{{"support_vectors", model.support_vectors},
           {"coefficients", model.coefficients},
           {"rho", model.rho},
           {"nu", model.nu},
           {"kernel",
            {{"family", to_string(model.kernel.family)},
             {"sigma", model.kernel.sigma},
             {"degree", model.kernel.degree},
             {"coef", model.kernel.coef},
             {"norm_exponent", model.kernel.norm_exponent},
             {"square_distance", model.kernel.square_distance}}}};
    if (!digest.empty()) j["config_digest"] = digest;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write one-class model: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

OneClassModel load_one_class(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open one-class model: " + path);
    json j;
    try {
        in >> j;
        OneClassModel model;
        model.support_vectors = j.at("support_vectors").get<std::vector<Vec>>();
        model.coefficients = j.at("coefficients").get<std::vector<double>>();
        model.rho = j.at("rho").get<double>();
        model.nu = j.at("nu").get<double>();
        const auto& k = j.at("kernel");
        model.kernel.family = kernel_family_from_string(k.at("family").get<std::string>());
        model.kernel.sigma = k.at("sigma").get<double>();
        model.kernel.degree = k.at("degree").get<double>();
        model.kernel.coef = k.at("coef").get<double>();
        model.kernel.norm_exponent = k.at("norm_exponent").get<int>();
        model.kernel.square_distance = k.at("square_distance").get<bool>();
        return model;
    } catch (const json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

}  // namespace mia
