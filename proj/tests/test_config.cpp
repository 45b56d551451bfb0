#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "mia/config.hpp"

using namespace mia;

namespace {

const char* kSample = R"(# experiment description
[run]
seed = 17

[synth]
num_classes = 5
dim = 8
samples_per_class = 50
cluster_spread = 0.2
label_noise = 0.1

[model]
arch = "softmax"
epochs = 300
learning_rate = 0.5

[attack]
variant = "diff-w/o"
projection = "top_k"
projection_k = 2
kernel = "gaussian"
sigma = 0.0          # 0 means median heuristic
batch_size = 50
mode = "batch"
move_tolerance = 0.001
max_iterations = 40
separation = "kmeans"
nu = 0.25
percentile = 95.0
attacks = ["diff-w/", "diff-w/o", "top1-threshold"]

[sweep]
ratios = [1, 5, 10]
class_counts = [5, 10]
seeds = [1, 2, 3]

[output]
dir = "results"
)";

}  // namespace

TEST_CASE("parser handles sections, comments, numbers, strings and arrays") {
    const ConfigMap map = ConfigMap::parse_string(kSample);
    CHECK(map.get_int("run.seed", 0) == 17);
    CHECK(map.get_int("synth.num_classes", 0) == 5);
    CHECK(map.get_double("synth.cluster_spread", 0) == doctest::Approx(0.2));
    CHECK(map.get_string("model.arch", "") == "softmax");
    CHECK(map.get_string("attack.variant", "") == "diff-w/o");
    CHECK(map.get_double("attack.sigma", -1) == doctest::Approx(0.0));
    CHECK(map.get_bool("missing.key", true));
    CHECK(map.get_double_list("sweep.ratios", {}) == std::vector<double>{1, 5, 10});
    CHECK(map.get_string_list("attack.attacks", {}) ==
          std::vector<std::string>{"diff-w/", "diff-w/o", "top1-threshold"});
    CHECK(map.has("output.dir"));
    CHECK(!map.has("output.nope"));
}

TEST_CASE("parse errors carry the line number") {
    try {
        ConfigMap::parse_string("[a]\nkey_without_value\n", "test.toml");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("test.toml") != std::string::npos);
        CHECK(msg.find("2") != std::string::npos);
    }
    CHECK_THROWS_AS(ConfigMap::parse_string("key = 1\n"), ValidationError);  // no section
    CHECK_THROWS_AS(ConfigMap::parse_file("/nonexistent/path.toml"), IoError);
}

TEST_CASE("overrides replace values and show up in the digest") {
    ConfigMap map = ConfigMap::parse_string(kSample);
    const std::string before = map.digest();
    map.apply_override("attack.batch_size=99");
    CHECK(map.get_int("attack.batch_size", 0) == 99);
    CHECK(map.digest() != before);
    map.apply_override("new.key=\"hello\"");
    CHECK(map.get_string("new.key", "") == "hello");
    CHECK_THROWS_AS(map.apply_override("not-an-assignment"), ValidationError);
    CHECK_THROWS_AS(map.apply_override("nodot=3"), ValidationError);
}

TEST_CASE("digest is stable across reordering and formatting") {
    const ConfigMap a = ConfigMap::parse_string("[x]\nalpha = 1\nbeta = 2\n");
    const ConfigMap b = ConfigMap::parse_string("[x]\nbeta = 2\n\n# comment\nalpha = 1\n");
    CHECK(a.digest() == b.digest());
    CHECK(a.digest().size() == 16);  // 64-bit hex
    const ConfigMap c = ConfigMap::parse_string("[x]\nalpha = 1\nbeta = 3\n");
    CHECK(a.digest() != c.digest());
}

TEST_CASE("file parsing matches string parsing") {
    const std::string path = "/tmp/mia_test_config.toml";
    {
        std::ofstream out(path);
        out << kSample;
    }
    const ConfigMap from_file = ConfigMap::parse_file(path);
    std::remove(path.c_str());
    CHECK(from_file.digest() == ConfigMap::parse_string(kSample).digest());
}

TEST_CASE("run config materializes from the map") {
    ConfigMap map = ConfigMap::parse_string(kSample);
    const RunConfig cfg = RunConfig::from_map(map);
    CHECK(cfg.benchmark.seed == 17);
    CHECK(cfg.benchmark.synth.num_classes == 5);
    CHECK(cfg.benchmark.synth.dim == 8);
    CHECK(cfg.benchmark.synth.label_noise == doctest::Approx(0.1));
    CHECK(cfg.benchmark.arch == Architecture::Softmax);
    CHECK(cfg.benchmark.epochs == 300);
    CHECK(cfg.attack.variant == DiffVariant::DiffWithout);
    CHECK(cfg.attack.projection.kind == ProjectionKind::TopK);
    CHECK(cfg.attack.projection.k == 2);
    CHECK(cfg.attack.batch_size == 50);
    CHECK(cfg.attack.move_tolerance == doctest::Approx(0.001));
    CHECK(cfg.attack.max_iterations == 40);
    CHECK(cfg.attack.separation.method == SeparationMethod::KMeans);
    CHECK(cfg.attack.use_median_sigma);  // sigma = 0
    CHECK(cfg.one_class_nu == doctest::Approx(0.25));
    CHECK(cfg.top1_percentile == doctest::Approx(95.0));
    CHECK(cfg.attacks ==
          std::vector<std::string>{"diff-w/", "diff-w/o", "top1-threshold"});
    CHECK(cfg.sweep.ratios == std::vector<double>{1, 5, 10});
    CHECK(cfg.sweep.class_counts == std::vector<std::size_t>{5, 10});
    CHECK(cfg.sweep.seeds == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(cfg.output_dir == "results");
    CHECK(cfg.digest == map.digest());
}

TEST_CASE("defaults apply when keys are absent") {
    const ConfigMap map = ConfigMap::parse_string("[run]\nseed = 3\n");
    const RunConfig cfg = RunConfig::from_map(map);
    CHECK(cfg.benchmark.seed == 3);
    CHECK(cfg.benchmark.synth.num_classes == 10);
    CHECK(cfg.benchmark.arch == Architecture::Mlp);
    CHECK(cfg.attack.variant == DiffVariant::DiffWith);
    CHECK(cfg.attack.projection.k == 3);
    CHECK(cfg.output_dir == "out");
    CHECK(cfg.attacks == std::vector<std::string>{"diff-w/"});
}

TEST_CASE("invalid enum values are rejected with context") {
    ConfigMap map = ConfigMap::parse_string("[attack]\nvariant = \"nope\"\n");
    CHECK_THROWS_AS(RunConfig::from_map(map), ValidationError);
    map = ConfigMap::parse_string("[model]\narch = \"transformer\"\n");
    CHECK_THROWS_AS(RunConfig::from_map(map), ValidationError);
    map = ConfigMap::parse_string("[attack]\nprojection = \"pca\"\n");
    CHECK_THROWS_AS(RunConfig::from_map(map), ValidationError);
}

TEST_CASE("fixed-sigma configs disable the median heuristic") {
    const ConfigMap map = ConfigMap::parse_string("[attack]\nsigma = 0.7\n");
    const RunConfig cfg = RunConfig::from_map(map);
    CHECK(!cfg.attack.use_median_sigma);
    CHECK(cfg.attack.kernel.sigma == doctest::Approx(0.7));
}
