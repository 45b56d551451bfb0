#include <doctest.h>

#include <algorithm>
#include <random>

#include "mia/projection.hpp"

using namespace mia;

TEST_CASE("sorted_all") {
    ProjectionSpec spec{ProjectionKind::SortedAll, 0};
    CHECK(project({0.2, 0.5, 0.3}, std::nullopt, spec) ==
          std::vector<double>{0.5, 0.3, 0.2});
}

TEST_CASE("top_k") {
    ProjectionSpec spec{ProjectionKind::TopK, 2};
    CHECK(project({0.1, 0.7, 0.2}, std::nullopt, spec) == std::vector<double>{0.7, 0.2});
    spec.k = 5;
    CHECK_THROWS_AS(project({0.1, 0.7, 0.2}, std::nullopt, spec), ValidationError);
}

TEST_CASE("top_k_plus_true appends the true-class score last") {
    ProjectionSpec spec{ProjectionKind::TopKPlusTrue, 3};
    CHECK(project({0.2, 0.5, 0.3}, 0, spec) == std::vector<double>{0.5, 0.3, 0.2});
    // duplication allowed when the true class is already among the top scores
    CHECK(project({0.2, 0.5, 0.3}, 1, spec) == std::vector<double>{0.5, 0.3, 0.5});
    CHECK_THROWS_AS(project({0.2, 0.5, 0.3}, std::nullopt, spec), ValidationError);
}

TEST_CASE("ties broken by ascending class index") {
    ProjectionSpec spec{ProjectionKind::TopK, 3};
    // deterministic regardless of equal values
    CHECK(project({0.25, 0.25, 0.25, 0.25}, std::nullopt, spec) ==
          std::vector<double>{0.25, 0.25, 0.25});
}

TEST_CASE("permutation invariance and first-coordinate property") {
    std::mt19937_64 rng(3);
    std::vector<double> probs{0.05, 0.3, 0.1, 0.25, 0.3};
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> shuffled = probs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        for (auto kind : {ProjectionKind::SortedAll, ProjectionKind::TopK}) {
            ProjectionSpec spec{kind, 3};
            const auto a = project(probs, std::nullopt, spec);
            const auto b = project(shuffled, std::nullopt, spec);
            CHECK(a == b);
            CHECK(a[0] == *std::max_element(probs.begin(), probs.end()));
        }
    }
}

TEST_CASE("project_all keeps dimension constant") {
    ProbeDataset ds;
    ds.num_classes = 4;
    ds.records = {{"a", {0.4, 0.3, 0.2, 0.1}, 0, std::nullopt},
                  {"b", {0.25, 0.25, 0.25, 0.25}, 1, std::nullopt}};
    const auto out = project_all(blind_view(ds), ProjectionSpec{ProjectionKind::TopK, 3});
    REQUIRE(out.size() == 2);
    CHECK(out[0].size() == 3);
    CHECK(out[1].size() == 3);
}
