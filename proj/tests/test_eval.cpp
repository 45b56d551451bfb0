#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "mia/eval.hpp"

using namespace mia;

namespace {

ProbeRecord rec(const std::string& id, std::vector<double> probs, std::optional<bool> member) {
    return {id, std::move(probs), std::nullopt, member};
}

MembershipPrediction pred(const std::string& id, bool member) {
    return {id, member, "diff-w/", 0, 0};
}

// Exact two-sided Mann-Whitney p-value by brute-force enumeration of all
// C(n1+n2, n1) group assignments, using mid-ranks. Independent of the
// library implementation.
double exact_mwu_p(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::size_t n = pooled.size(), n1 = a.size();

    auto ranks_of = [&](const std::vector<double>& values) {
        std::vector<double> ranks(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            double less = 0, equal = 0;
            for (double v : values) {
                if (v < values[i]) ++less;
                else if (v == values[i]) ++equal;
            }
            ranks[i] = less + (equal + 1.0) / 2.0;
        }
        return ranks;
    };
    const std::vector<double> ranks = ranks_of(pooled);

    auto min_u_for_mask = [&](unsigned mask) {
        double r1 = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) r1 += ranks[i];
        const double n1d = static_cast<double>(n1);
        const double n2d = static_cast<double>(n - n1);
        const double u1 = r1 - n1d * (n1d + 1.0) / 2.0;
        return std::min(u1, n1d * n2d - u1);
    };

    unsigned obs_mask = 0;
    for (std::size_t i = 0; i < n1; ++i) obs_mask |= (1u << i);
    const double obs = min_u_for_mask(obs_mask);

    std::size_t total = 0, at_most = 0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != n1) continue;
        ++total;
        if (min_u_for_mask(mask) <= obs + 1e-9) ++at_most;
    }
    return static_cast<double>(at_most) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("metrics arithmetic on a worked example") {
    ProbeDataset truth;
    truth.num_classes = 2;
    truth.records = {rec("a", {0.6, 0.4}, true),  rec("b", {0.6, 0.4}, true),
                     rec("c", {0.6, 0.4}, true),  rec("d", {0.6, 0.4}, true),
                     rec("e", {0.6, 0.4}, false), rec("f", {0.6, 0.4}, false)};
    // tp=3 (a,b,c), fn=1 (d), fp=1 (e), tn=1 (f)
    const std::vector<MembershipPrediction> preds = {pred("a", true),  pred("b", true),
                                                     pred("c", true),  pred("d", false),
                                                     pred("e", true),  pred("f", false)};
    const MetricsReport m = compute_metrics(preds, truth);
    CHECK(m.tp == 3);
    CHECK(m.fp == 1);
    CHECK(m.fn == 1);
    CHECK(m.tn == 1);
    CHECK(m.precision == doctest::Approx(0.75));
    CHECK(m.recall == doctest::Approx(0.75));
    CHECK(m.f1 == doctest::Approx(0.75));
    CHECK(m.variant == "diff-w/");
}

TEST_CASE("metrics edge cases") {
    ProbeDataset truth;
    truth.num_classes = 2;
    truth.records = {rec("a", {0.6, 0.4}, false), rec("b", {0.6, 0.4}, false)};
    // no positives predicted, none exist: all metrics defined as 0
    const MetricsReport m = compute_metrics({pred("a", false), pred("b", false)}, truth);
    CHECK(m.precision == 0.0);
    CHECK(m.recall == 0.0);
    CHECK(m.f1 == 0.0);

    // unknown id
    CHECK_THROWS_AS(compute_metrics({pred("zz", true)}, truth), ValidationError);
    // unlabeled ground truth
    ProbeDataset unlabeled;
    unlabeled.num_classes = 2;
    unlabeled.records = {rec("a", {0.6, 0.4}, std::nullopt)};
    CHECK_THROWS_AS(compute_metrics({pred("a", true)}, unlabeled), ValidationError);
}

TEST_CASE("mann-whitney: identical samples of six give U=18 and p=1") {
    const std::vector<double> x{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    const MannWhitneyResult r = mann_whitney_u(x, x);
    CHECK(r.u == doctest::Approx(18.0));
    CHECK(r.p_value == doctest::Approx(1.0));
}

TEST_CASE("mann-whitney: complete dominance gives U=0") {
    const std::vector<double> a{1, 2, 3, 4};
    const std::vector<double> b{10, 11, 12, 13};
    const MannWhitneyResult r = mann_whitney_u(a, b);
    CHECK(r.u == doctest::Approx(0.0));
    // exact: 2 / C(8,4) = 2/70
    CHECK(r.p_value == doctest::Approx(2.0 / 70.0).epsilon(1e-9));
}

TEST_CASE("mann-whitney matches brute-force enumeration on small samples") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> val(0, 6);  // small range forces ties
    std::uniform_int_distribution<std::size_t> size(3, 7);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<double> a(size(rng)), b(size(rng));
        for (double& v : a) v = val(rng);
        for (double& v : b) v = val(rng);
        const MannWhitneyResult got = mann_whitney_u(a, b);
        CHECK(got.p_value == doctest::Approx(exact_mwu_p(a, b)).epsilon(1e-9));
        CHECK(got.p_value >= 0.0);
        CHECK(got.p_value <= 1.0);
        // min-U is symmetric in the arguments
        const MannWhitneyResult swapped = mann_whitney_u(b, a);
        CHECK(swapped.u == doctest::Approx(got.u));
        CHECK(swapped.p_value == doctest::Approx(got.p_value));
    }
}

TEST_CASE("mann-whitney large-sample approximation is sane") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g0(0.0, 1.0), g1(3.0, 1.0);
    std::vector<double> a(50), b(50), c(50);
    for (double& v : a) v = g0(rng);
    for (double& v : b) v = g1(rng);
    for (double& v : c) v = g0(rng);
    const MannWhitneyResult shifted = mann_whitney_u(a, b);
    CHECK(shifted.p_value < 1e-6);
    const MannWhitneyResult same = mann_whitney_u(a, c);
    CHECK(same.p_value > 0.01);
    CHECK_THROWS_AS(mann_whitney_u({}, {1.0}), ValidationError);
}

TEST_CASE("strip_membership removes only the membership bits") {
    ProbeDataset ds;
    ds.num_classes = 2;
    ds.records = {{"a", {0.7, 0.3}, 1, true}, {"b", {0.2, 0.8}, std::nullopt, false}};
    const ProbeDataset blind = strip_membership(ds);
    REQUIRE(blind.size() == 2);
    CHECK(!blind.records[0].is_member);
    CHECK(!blind.records[1].is_member);
    CHECK(blind.records[0].true_label == 1);
    CHECK(blind.records[0].probs == ds.records[0].probs);
}

TEST_CASE("ratio sweep composes the requested mix and strips membership") {
    ProbeDataset members, nonmembers;
    members.num_classes = 2;
    nonmembers.num_classes = 2;
    for (int i = 0; i < 30; ++i)
        members.records.push_back(rec("m" + std::to_string(i), {0.9, 0.1}, true));
    for (int i = 0; i < 200; ++i)
        nonmembers.records.push_back(rec("n" + std::to_string(i), {0.45, 0.55}, false));

    std::vector<std::size_t> seen_sizes;
    bool saw_membership_bit = false;
    NamedAttack probe_attack{
        "probe", [&](const ProbeDataset& target, std::uint64_t) {
            seen_sizes.push_back(target.size());
            std::vector<MembershipPrediction> out;
            for (const auto& r : target.records) {
                if (r.is_member) saw_membership_bit = true;
                out.push_back({r.id, r.probs[0] > 0.5, "probe", 0, 0});
            }
            return out;
        }};

    SweepConfig cfg;
    cfg.ratios = {1, 5};
    cfg.seeds = {1, 2};
    const auto rows = ratio_sweep({probe_attack}, members, nonmembers, cfg);
    REQUIRE(rows.size() == 2);
    CHECK(!saw_membership_bit);
    // ratio 1: 30+30; ratio 5: 30+150 (members capped by the pool)
    CHECK(std::count(seen_sizes.begin(), seen_sizes.end(), 60) == 2);
    CHECK(std::count(seen_sizes.begin(), seen_sizes.end(), 180) == 2);
    for (const auto& row : rows) {
        CHECK(row.attack == "probe");
        CHECK(row.seeds == 2);
        CHECK(row.f1_mean == doctest::Approx(1.0));  // perfectly separable probe
        CHECK(row.f1_sem == doctest::Approx(0.0));
    }
    CHECK(rows[0].x == doctest::Approx(1.0));
    CHECK(rows[1].x == doctest::Approx(5.0));
}

TEST_CASE("sweep config validation") {
    SweepConfig cfg;
    cfg.seeds = {1};
    cfg.ratios = {0.5};
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.ratios = {1.0};
    CHECK_NOTHROW(cfg.validate());
    cfg.seeds.clear();
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("convergence totals and csv") {
    BatchLog b0, b1;
    b0.batch_index = 0;
    b0.outcome.iterations = 2;
    b0.outcome.moves_attempted = 10;
    b0.outcome.moves_committed = 4;
    b0.outcome.wall_time_seconds = 0.5;
    b0.outcome.trajectory = {{1, 0.2, 3}, {2, 0.25, 1}};
    b1.batch_index = 1;
    b1.outcome.iterations = 1;
    b1.outcome.moves_attempted = 5;
    b1.outcome.moves_committed = 0;
    b1.outcome.wall_time_seconds = 0.25;
    b1.outcome.trajectory = {{1, 0.4, 0}};

    const ConvergenceTotals totals = convergence_totals({b0, b1});
    CHECK(totals.total_iterations == 3);
    CHECK(totals.total_moves_attempted == 15);
    CHECK(totals.total_moves_committed == 4);
    CHECK(totals.total_wall_time_seconds == doctest::Approx(0.75));

    const std::string path = "/tmp/mia_test_conv.csv";
    save_convergence_csv({b0, b1}, path, "abcd");
    std::ifstream in(path);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line.find("abcd") != std::string::npos);
    REQUIRE(std::getline(in, line));
    CHECK(line == "batch,iteration,distance,moves_committed");
    std::size_t data_rows = 0;
    bool saw_totals = false;
    while (std::getline(in, line)) {
        if (line.rfind("# totals", 0) == 0) saw_totals = true;
        else if (!line.empty()) ++data_rows;
    }
    CHECK(data_rows == 3);
    CHECK(saw_totals);
    std::remove(path.c_str());
}

TEST_CASE("sweep and metrics csv writers embed the digest") {
    const std::vector<SweepRow> rows = {{1.0, "diff-w/", 0.9, 0.01, 5}};
    const std::string spath = "/tmp/mia_test_sweep.csv";
    save_sweep_csv(rows, "ratio", spath, "f00d");
    std::ifstream sin(spath);
    std::string line;
    REQUIRE(std::getline(sin, line));
    CHECK(line.find("f00d") != std::string::npos);
    REQUIRE(std::getline(sin, line));
    CHECK(line == "ratio,attack,f1_mean,f1_sem,seeds");
    REQUIRE(std::getline(sin, line));
    CHECK(line.find("diff-w/") != std::string::npos);
    std::remove(spath.c_str());

    MetricsReport m;
    m.precision = 0.5;
    m.recall = 1.0;
    m.f1 = 2.0 / 3.0;
    m.tp = 1;
    m.fp = 1;
    m.variant = "1class";
    const std::string mpath = "/tmp/mia_test_metrics.csv";
    save_metrics_csv({m}, mpath, "d00d");
    std::ifstream min(mpath);
    REQUIRE(std::getline(min, line));
    CHECK(line.find("d00d") != std::string::npos);
    REQUIRE(std::getline(min, line));
    CHECK(line == "variant,precision,recall,f1,tp,fp,fn,tn");
    std::remove(mpath.c_str());
}
