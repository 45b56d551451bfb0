#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mia/data_model.hpp"

namespace mia {

enum class ProjectionKind { SortedAll, TopK, TopKPlusTrue };

ProjectionKind projection_kind_from_string(const std::string& s);
std::string to_string(ProjectionKind k);

// Reduction of an m-class probability vector to k ranked features.
// sorted_all: all scores descending. top_k: the k largest, descending.
// top_k_plus_true: the k-1 largest descending, then the true-class score,
// so k is always the output dimension.
struct ProjectionSpec {
    ProjectionKind kind = ProjectionKind::TopK;
    std::size_t k = 3;

    void validate(std::size_t num_classes) const;
};

std::vector<double> project(const std::vector<double>& probs,
                            std::optional<int> true_label, const ProjectionSpec& spec);

// Projects every record of a blind view; dimension is constant across the
// output.
std::vector<std::vector<double>> project_all(const std::vector<BlindRecord>& records,
                                             const ProjectionSpec& spec);

}  // namespace mia
