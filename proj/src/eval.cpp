#include "mia/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_map>

namespace mia {

ProbeDataset strip_membership(const ProbeDataset& ds) {
    ProbeDataset out = ds;
    for (auto& r : out.records) r.is_member.reset();
    return out;
}

MetricsReport compute_metrics(const std::vector<MembershipPrediction>& preds,
                              const ProbeDataset& ground_truth) {
    std::unordered_map<std::string, bool> truth;
    for (const auto& r : ground_truth.records)
        if (r.is_member) truth[r.id] = *r.is_member;

    MetricsReport rep;
    for (const auto& p : preds) {
        const auto it = truth.find(p.id);
        if (it == truth.end())
            throw ValidationError("compute_metrics: no ground truth for id '" + p.id + "'");
        if (p.predicted_member)
            (it->second ? rep.tp : rep.fp)++;
        else
            (it->second ? rep.fn : rep.tn)++;
        if (rep.variant.empty()) rep.variant = p.variant;
    }
    rep.precision = (rep.tp + rep.fp) ? static_cast<double>(rep.tp) /
                                            static_cast<double>(rep.tp + rep.fp)
                                      : 0.0;
    rep.recall = (rep.tp + rep.fn) ? static_cast<double>(rep.tp) /
                                         static_cast<double>(rep.tp + rep.fn)
                                   : 0.0;
    rep.f1 = (rep.precision + rep.recall > 0.0)
                 ? 2.0 * rep.precision * rep.recall / (rep.precision + rep.recall)
                 : 0.0;
    return rep;
}

namespace {

// Mid-ranks of the pooled values, 1-based.
std::vector<double> mid_ranks(const std::vector<double>& pooled) {
    const std::size_t n = pooled.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double min_u_from_rank_sum(double rank_sum_a, std::size_t n1, std::size_t n2) {
    const double ua = rank_sum_a - static_cast<double>(n1 * (n1 + 1)) / 2.0;
    const double ub = static_cast<double>(n1 * n2) - ua;
    return std::min(ua, ub);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

MannWhitneyResult mann_whitney_u(const std::vector<double>& sample_a,
                                 const std::vector<double>& sample_b) {
    const std::size_t n1 = sample_a.size();
    const std::size_t n2 = sample_b.size();
    if (n1 < 3 || n2 < 3) throw ValidationError("mann_whitney_u: samples must have >= 3 values");

    std::vector<double> pooled = sample_a;
    pooled.insert(pooled.end(), sample_b.begin(), sample_b.end());
    const std::vector<double> ranks = mid_ranks(pooled);

    double rank_sum_a = 0.0;
    for (std::size_t i = 0; i < n1; ++i) rank_sum_a += ranks[i];
    const double u_obs = min_u_from_rank_sum(rank_sum_a, n1, n2);

    MannWhitneyResult result;
    result.u = u_obs;

    const std::size_t n = n1 + n2;
    if (n1 <= 8 && n2 <= 8) {
        // exact: enumerate all assignments of n1 pooled positions to group A
        std::vector<std::size_t> idx(n1);
        std::iota(idx.begin(), idx.end(), 0);
        std::size_t extreme = 0, total = 0;
        while (true) {
            double rs = 0.0;
            for (std::size_t i : idx) rs += ranks[i];
            if (min_u_from_rank_sum(rs, n1, n2) <= u_obs + 1e-9) ++extreme;
            ++total;
            // next combination
            std::size_t k = n1;
            while (k > 0 && idx[k - 1] == n - n1 + k - 1) --k;
            if (k == 0) break;
            ++idx[k - 1];
            for (std::size_t j = k; j < n1; ++j) idx[j] = idx[j - 1] + 1;
        }
        result.p_value = static_cast<double>(extreme) / static_cast<double>(total);
        return result;
    }

    // normal approximation with tie correction
    const double mu = static_cast<double>(n1 * n2) / 2.0;
    double tie_term = 0.0;
    {
        std::vector<double> sorted = pooled;
        std::sort(sorted.begin(), sorted.end());
        std::size_t i = 0;
        while (i < sorted.size()) {
            std::size_t j = i;
            while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
            const double t = static_cast<double>(j - i + 1);
            tie_term += t * t * t - t;
            i = j + 1;
        }
    }
    const double nn = static_cast<double>(n);
    const double var = static_cast<double>(n1 * n2) / 12.0 *
                       ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
    if (var <= 0.0) {
        result.p_value = 1.0;
        return result;
    }
    const double z = (u_obs - mu + 0.5) / std::sqrt(var);
    result.p_value = std::min(1.0, 2.0 * normal_cdf(z));
    return result;
}

void SweepConfig::validate() const {
    for (double r : ratios)
        if (r < 1.0) throw ValidationError("sweep: ratios must be >= 1");
    for (std::size_t m : class_counts)
        if (m < 2) throw ValidationError("sweep: class counts must be >= 2");
    if (seeds.empty()) throw ValidationError("sweep: need at least one seed");
}

namespace {

struct Stats {
    double mean = 0.0;
    double sem = 0.0;
};

Stats mean_sem(const std::vector<double>& xs) {
    Stats s;
    const double n = static_cast<double>(xs.size());
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.sem = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return s;
}

}  // namespace

std::vector<SweepRow> ratio_sweep(const std::vector<NamedAttack>& attacks,
                                  const ProbeDataset& member_pool,
                                  const ProbeDataset& nonmember_pool,
                                  const SweepConfig& config) {
    config.validate();
    if (config.ratios.empty()) throw ValidationError("ratio_sweep: no ratios given");

    std::vector<SweepRow> rows;
    for (double r : config.ratios) {
        // largest member count the pools support at this ratio
        const std::size_t k = std::min(
            member_pool.size(),
            static_cast<std::size_t>(static_cast<double>(nonmember_pool.size()) / r));
        const std::size_t num_nonmem =
            static_cast<std::size_t>(std::llround(static_cast<double>(k) * r));
        if (k == 0 || num_nonmem == 0 || num_nonmem > nonmember_pool.size())
            throw ValidationError("ratio_sweep: pools too small for ratio " +
                                  std::to_string(r));

        std::vector<std::vector<double>> f1s(attacks.size());
        for (std::uint64_t seed : config.seeds) {
            std::mt19937_64 rng(seed);
            std::vector<std::size_t> mi(member_pool.size()), ni(nonmember_pool.size());
            std::iota(mi.begin(), mi.end(), 0);
            std::iota(ni.begin(), ni.end(), 0);
            std::shuffle(mi.begin(), mi.end(), rng);
            std::shuffle(ni.begin(), ni.end(), rng);

            ProbeDataset target;
            target.num_classes = member_pool.num_classes;
            for (std::size_t i = 0; i < k; ++i) {
                auto rec = member_pool.records[mi[i]];
                rec.is_member = true;
                target.records.push_back(std::move(rec));
            }
            for (std::size_t i = 0; i < num_nonmem; ++i) {
                auto rec = nonmember_pool.records[ni[i]];
                rec.is_member = false;
                target.records.push_back(std::move(rec));
            }
            std::shuffle(target.records.begin(), target.records.end(), rng);

            const ProbeDataset blind = strip_membership(target);
            for (std::size_t a = 0; a < attacks.size(); ++a) {
                const auto preds = attacks[a].run(blind, seed);
                f1s[a].push_back(compute_metrics(preds, target).f1);
            }
        }
        for (std::size_t a = 0; a < attacks.size(); ++a) {
            const Stats s = mean_sem(f1s[a]);
            rows.push_back({r, attacks[a].name, s.mean, s.sem, config.seeds.size()});
        }
    }
    return rows;
}

std::vector<SweepRow> class_sweep(const std::vector<NamedAttack>& attacks,
                                  const BenchmarkFactory& factory, const SweepConfig& config) {
    config.validate();
    if (config.class_counts.empty()) throw ValidationError("class_sweep: no class counts");

    std::vector<SweepRow> rows;
    for (std::size_t m : config.class_counts) {
        std::vector<std::vector<double>> f1s(attacks.size());
        for (std::uint64_t seed : config.seeds) {
            const ProbeDataset target = factory(m, seed);
            const ProbeDataset blind = strip_membership(target);
            for (std::size_t a = 0; a < attacks.size(); ++a) {
                const auto preds = attacks[a].run(blind, seed);
                f1s[a].push_back(compute_metrics(preds, target).f1);
            }
        }
        for (std::size_t a = 0; a < attacks.size(); ++a) {
            const Stats s = mean_sem(f1s[a]);
            rows.push_back({static_cast<double>(m), attacks[a].name, s.mean, s.sem,
                            config.seeds.size()});
        }
    }
    return rows;
}

void save_sweep_csv(const std::vector<SweepRow>& rows, const std::string& x_name,
                    const std::string& path, const std::string& digest) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write sweep csv: " + path);
    if (!digest.empty()) out << "# config_digest=" << digest << '\n';
    out << x_name << ",attack,f1_mean,f1_sem,seeds\n";
    for (const auto& r : rows)
        out << r.x << ',' << r.attack << ',' << r.f1_mean << ',' << r.f1_sem << ','
            << r.seeds << '\n';
    if (!out) throw IoError("write failed: " + path);
}

ConvergenceTotals convergence_totals(const std::vector<BatchLog>& logs) {
    ConvergenceTotals t;
    for (const auto& log : logs) {
        t.total_iterations += log.outcome.iterations;
        t.total_moves_attempted += log.outcome.moves_attempted;
        t.total_moves_committed += log.outcome.moves_committed;
        t.total_wall_time_seconds += log.outcome.wall_time_seconds;
    }
    return t;
}

void save_convergence_csv(const std::vector<BatchLog>& logs, const std::string& path,
                          const std::string& digest) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write convergence csv: " + path);
    if (!digest.empty()) out << "# config_digest=" << digest << '\n';
    out << "batch,iteration,distance,moves_committed\n";
    for (const auto& log : logs)
        for (const auto& it : log.outcome.trajectory)
            out << log.batch_index << ',' << it.iteration << ',' << it.distance << ','
                << it.moves_committed << '\n';
    const ConvergenceTotals t = convergence_totals(logs);
    out << "# totals iterations=" << t.total_iterations
        << " moves_attempted=" << t.total_moves_attempted
        << " moves_committed=" << t.total_moves_committed
        << " wall_time_seconds=" << t.total_wall_time_seconds << '\n';
    if (!out) throw IoError("write failed: " + path);
}

void save_metrics_csv(const std::vector<MetricsReport>& reports, const std::string& path,
                      const std::string& digest) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write metrics csv: " + path);
    if (!digest.empty()) out << "# config_digest=" << digest << '\n';
    out << "variant,precision,recall,f1,tp,fp,fn,tn\n";
    for (const auto& r : reports)
        out << r.variant << ',' << r.precision << ',' << r.recall << ',' << r.f1 << ','
            << r.tp << ',' << r.fp << ',' << r.fn << ',' << r.tn << '\n';
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace mia
