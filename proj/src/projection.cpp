#include "mia/projection.hpp"

#include <algorithm>
#include <numeric>

namespace mia {

ProjectionKind projection_kind_from_string(const std::string& s) {
    if (s == "sorted_all") return ProjectionKind::SortedAll;
    if (s == "top_k") return ProjectionKind::TopK;
    if (s == "top_k_plus_true") return ProjectionKind::TopKPlusTrue;
    throw ValidationError("unknown projection kind: " + s);
}

std::string to_string(ProjectionKind k) {
    switch (k) {
        case ProjectionKind::SortedAll: return "sorted_all";
        case ProjectionKind::TopK: return "top_k";
        case ProjectionKind::TopKPlusTrue: return "top_k_plus_true";
    }
    return "?";
}

void ProjectionSpec::validate(std::size_t num_classes) const {
    if (kind == ProjectionKind::SortedAll) return;
    if (k == 0) throw ValidationError("projection k must be positive");
    if (k > num_classes)
        throw ValidationError("projection k=" + std::to_string(k) + " exceeds class count " +
                              std::to_string(num_classes));
}

std::vector<double> project(const std::vector<double>& probs,
                            std::optional<int> true_label, const ProjectionSpec& spec) {
    const std::size_t m = probs.size();
    spec.validate(m);

    // Descending value, ties broken by ascending class index (stable).
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });

    switch (spec.kind) {
        case ProjectionKind::SortedAll: {
            std::vector<double> out(m);
            for (std::size_t i = 0; i < m; ++i) out[i] = probs[order[i]];
            return out;
        }
        case ProjectionKind::TopK: {
            std::vector<double> out(spec.k);
            for (std::size_t i = 0; i < spec.k; ++i) out[i] = probs[order[i]];
            return out;
        }
        case ProjectionKind::TopKPlusTrue: {
            if (!true_label)
                throw ValidationError("top_k_plus_true projection requires true_label");
            std::vector<double> out(spec.k);
            for (std::size_t i = 0; i + 1 < spec.k; ++i) out[i] = probs[order[i]];
            out[spec.k - 1] = probs[static_cast<std::size_t>(*true_label)];
            return out;
        }
    }
    throw ValidationError("project: bad projection kind");
}

std::vector<std::vector<double>> project_all(const std::vector<BlindRecord>& records,
                                             const ProjectionSpec& spec) {
    std::vector<std::vector<double>> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(project(*r.probs, r.true_label, spec));
    return out;
}

}  // namespace mia
