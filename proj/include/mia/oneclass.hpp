#pragma once

#include <string>
#include <vector>

#include "mia/data_model.hpp"
#include "mia/kernels.hpp"

namespace mia {

// nu-style one-class separator trained on projected nonmember outputs.
// decision(x) = sum_i alpha_i k(s_i, x) - rho; negative means anomalous,
// which the attack reads as "member".
struct OneClassModel {
    std::vector<Vec> support_vectors;
    std::vector<double> coefficients;  // alpha_i, in [0, 1/(nu n)], summing to 1
    double rho = 0.0;
    KernelSpec kernel;
    double nu = 0.1;

    double decision(const Vec& x) const;
};

// Dual coordinate ascent (SMO-style working set of two) to KKT tolerance
// 1e-4, capped at 100000 pair updates. Throws NumericalError if the cap is
// hit before the tolerance.
OneClassModel train_one_class(const std::vector<Vec>& nonmem_projected,
                              const KernelSpec& kernel, double nu);

struct OneClassInput {
    std::string id;
    Vec features;
};

// Member iff decision(x) < 0.
std::vector<MembershipPrediction> classify_one_class(const OneClassModel& model,
                                                     const std::vector<OneClassInput>& targets);

void save_one_class(const OneClassModel& model, const std::string& path,
                    const std::string& digest = "");
OneClassModel load_one_class(const std::string& path);

}  // namespace mia
