#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "mia/data_model.hpp"

using namespace mia;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/mia_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
    void write(const std::string& content) const {
        std::ofstream out(path);
        out << content;
    }
};

}  // namespace

TEST_CASE("load valid jsonl") {
    TempFile f("probes.jsonl");
    f.write(R"({"id": "s1", "probs": [0.1, 0.2, 0.3, 0.2, 0.2], "true_label": 1, "is_member": true}
{"id": "s2", "probs": [0.9, 0.05, 0.03, 0.01, 0.01]}
{"id": "s3", "probs": [0.2, 0.2, 0.2, 0.2, 0.2], "true_label": null, "is_member": null}
)");
    const ProbeDataset ds = load_probe_records(f.path);
    REQUIRE(ds.size() == 3);
    CHECK(ds.num_classes == 5);
    CHECK(ds.records[0].true_label == 1);
    CHECK(ds.records[0].is_member == true);
    CHECK(!ds.records[1].true_label);
    CHECK(!ds.records[2].is_member);
}

TEST_CASE("probability sum violation names the line") {
    TempFile f("badsum.jsonl");
    f.write(R"({"id": "ok", "probs": [0.5, 0.5]}
{"id": "bad", "probs": [0.5, 0.3]}
)");
    try {
        load_probe_records(f.path);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
}

TEST_CASE("dimension mismatch across lines") {
    TempFile f("dims.jsonl");
    f.write(R"({"id": "a", "probs": [0.2, 0.2, 0.2, 0.2, 0.2]}
{"id": "b", "probs": [0.25, 0.25, 0.25, 0.25]}
)");
    CHECK_THROWS_AS(load_probe_records(f.path), ValidationError);
}

TEST_CASE("expected_classes enforced") {
    TempFile f("classes.jsonl");
    f.write(R"({"id": "a", "probs": [0.5, 0.5]}
)");
    CHECK_NOTHROW(load_probe_records(f.path, 2));
    CHECK_THROWS_AS(load_probe_records(f.path, 3), ValidationError);
}

TEST_CASE("record-level validation") {
    ProbeRecord r{"x", {0.5, 0.5}, std::nullopt, std::nullopt};
    CHECK_NOTHROW(validate_record(r));
    r.probs = {};
    CHECK_THROWS_AS(validate_record(r), ValidationError);
    r.probs = {1.2, -0.2};
    CHECK_THROWS_AS(validate_record(r), ValidationError);
    r.probs = {0.5, 0.5};
    r.true_label = 2;
    CHECK_THROWS_AS(validate_record(r), ValidationError);
}

TEST_CASE("duplicate ids rejected") {
    ProbeDataset ds;
    ds.num_classes = 2;
    ds.records = {{"a", {0.5, 0.5}, std::nullopt, std::nullopt},
                  {"a", {0.4, 0.6}, std::nullopt, std::nullopt}};
    CHECK_THROWS_AS(validate_dataset(ds), ValidationError);
}

TEST_CASE("probe round trip is field-exact") {
    ProbeDataset ds;
    ds.num_classes = 3;
    ds.records = {{"s17", {0.1, 0.7, 0.2}, 1, true},
                  {"s18", {0.25, 0.25, 0.5}, std::nullopt, false},
                  {"s19", {1.0 / 3, 1.0 / 3, 1.0 / 3}, 0, std::nullopt}};
    TempFile f("roundtrip.jsonl");
    save_probe_records(ds, f.path, "deadbeef");
    const ProbeDataset back = load_probe_records(f.path);
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(back.records[i].id == ds.records[i].id);
        CHECK(back.records[i].probs == ds.records[i].probs);
        CHECK(back.records[i].true_label == ds.records[i].true_label);
        CHECK(back.records[i].is_member == ds.records[i].is_member);
    }
}

TEST_CASE("blind view hides membership") {
    ProbeDataset ds;
    ds.num_classes = 2;
    ds.records = {{"a", {0.9, 0.1}, 0, true}};
    const auto view = blind_view(ds);
    REQUIRE(view.size() == 1);
    CHECK(*view[0].id == "a");
    CHECK(view[0].true_label == 0);
    // BlindRecord has no membership field at all; nothing further to check
    // at runtime, the type system enforces it.
}

TEST_CASE("prediction csv round trip") {
    std::vector<MembershipPrediction> preds = {{"a", true, "diff-w/", 3, 7},
                                               {"b", false, "diff-w/", 3, 7}};
    TempFile f("preds.csv");
    save_predictions(preds, f.path, "cafe");
    const auto back = load_predictions(f.path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].id == "a");
    CHECK(back[0].predicted_member);
    CHECK(back[1].id == "b");
    CHECK(!back[1].predicted_member);
    CHECK(back[0].variant == "diff-w/");
}

TEST_CASE("empty prediction set writes header only") {
    TempFile f("empty.csv");
    save_predictions({}, f.path);
    std::ifstream in(f.path);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "id,predicted_member,variant");
    CHECK(!std::getline(in, line));
}
