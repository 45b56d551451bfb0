#include "mia/diff_attack.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace mia {

DiffVariant diff_variant_from_string(const std::string& s) {
    if (s == "diff-w/" || s == "diff-w") return DiffVariant::DiffWith;
    if (s == "diff-w/o" || s == "diff-wo") return DiffVariant::DiffWithout;
    if (s == "1class" || s == "oneclass") return DiffVariant::OneClass;
    throw ValidationError("unknown attack variant: " + s);
}

std::string to_string(DiffVariant v) {
    switch (v) {
        case DiffVariant::DiffWith: return "diff-w/";
        case DiffVariant::DiffWithout: return "diff-w/o";
        case DiffVariant::OneClass: return "1class";
    }
    return "?";
}

void AttackConfig::validate() const {
    if (batch_size == 1) throw ValidationError("batch_size must be >= 2");
    if (move_tolerance < 0.0) throw ValidationError("move_tolerance must be >= 0");
    if (max_iterations == 0) throw ValidationError("max_iterations must be positive");
}

std::size_t AttackConfig::effective_batch_size() const {
    if (batch_size != 0) return batch_size;
    return variant == DiffVariant::DiffWithout ? 1000 : 20;
}

namespace {

std::vector<std::size_t> ascending_id_order(const std::vector<ProjectedRecord>& recs) {
    std::vector<std::size_t> order(recs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return recs[a].id < recs[b].id; });
    return order;
}

std::vector<Vec> features_of(const std::vector<ProjectedRecord>& recs) {
    std::vector<Vec> out;
    out.reserve(recs.size());
    for (const auto& r : recs) out.push_back(r.features);
    return out;
}

}  // namespace

DiffOutcome diff_single(const std::vector<ProjectedRecord>& nonmem,
                        const std::vector<ProjectedRecord>& target,
                        const KernelSpec& kernel, double tol, std::size_t max_iter) {
    if (nonmem.empty() || target.empty()) throw ValidationError("diff_single: empty input");
    const auto t0 = std::chrono::steady_clock::now();

    // Pool: side A = target, side B = nonmem.
    MmdState state(features_of(target), features_of(nonmem), kernel);

    DiffOutcome out;
    std::vector<bool> marked(target.size(), false);
    const std::vector<std::size_t> sweep = ascending_id_order(target);
    std::size_t remaining = target.size();
    bool emptied = false;
    double last_committed = 0.0;

    while (true) {
        ++out.iterations;
        const double d = state.distance();
        std::uint64_t committed = 0;
        std::vector<std::size_t> newly_marked;
        for (std::size_t p : sweep) {
            if (marked[p]) continue;
            if (state.count_a() < 2) continue;  // the move would empty the target side
            ++out.moves_attempted;
            const double d_after = state.preview_move_a_to_b(p);
            if (d_after >= d + tol) {
                // Joins the nonmember side now; leaves the target side only
                // when the sweep ends.
                state.add_to_b(p);
                marked[p] = true;
                newly_marked.push_back(p);
                last_committed = d_after;
                ++committed;
            }
        }
        out.moves_committed += committed;
        out.trajectory.push_back({out.iterations, d, committed});
        if (newly_marked.size() == remaining) {
            emptied = true;
            break;
        }
        for (std::size_t p : newly_marked) state.remove_from_a(p);
        remaining -= newly_marked.size();
        if (committed == 0 || out.iterations >= max_iter) break;
    }

    out.final_distance = emptied ? last_committed : state.distance();
    for (std::size_t p = 0; p < target.size(); ++p)
        (marked[p] ? out.pred_nonmember_ids : out.pred_member_ids).push_back(target[p].id);
    out.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

Side decide_member_side(const std::vector<std::vector<double>>& set_a,
                        const std::vector<std::vector<double>>& set_b) {
    if (set_a.empty() || set_b.empty())
        throw ValidationError("decide_member_side: empty side");
    auto mean_top1 = [](const std::vector<std::vector<double>>& s) {
        double acc = 0.0;
        for (const auto& v : s) acc += v[0];
        return acc / static_cast<double>(s.size());
    };
    const double ma = mean_top1(set_a);
    const double mb = mean_top1(set_b);
    if (ma == mb)
        std::cerr << "warning: decide_member_side: equal mean confidence, picking side A\n";
    return mb > ma ? Side::B : Side::A;
}

DiffOutcome diff_bi(const std::vector<ProjectedRecord>& part1,
                    const std::vector<ProjectedRecord>& part2,
                    const KernelSpec& kernel, double tol, std::size_t max_iter) {
    if (part1.size() < 2 || part2.size() < 2)
        throw ValidationError("diff_bi: both sides need >= 2 elements");
    const auto t0 = std::chrono::steady_clock::now();

    const std::size_t n1 = part1.size();
    std::vector<ProjectedRecord> all = part1;
    all.insert(all.end(), part2.begin(), part2.end());

    // Side A = part1, side B = part2; pool index i maps to all[i].
    MmdState state(features_of(part1), features_of(part2), kernel);

    DiffOutcome out;
    double d = state.distance();

    const std::vector<std::size_t> order = ascending_id_order(all);
    while (true) {
        ++out.iterations;
        std::uint64_t committed = 0;
        // forward sweep: A -> B over elements on side A at sweep start
        std::vector<std::size_t> fwd;
        for (std::size_t p : order)
            if (state.in_a(p)) fwd.push_back(p);
        for (std::size_t p : fwd) {
            if (state.count_a() < 2) continue;  // may not empty a side
            ++out.moves_attempted;
            const double d_after = state.preview_move_a_to_b(p);
            if (d_after >= d + tol) {
                state.move_a_to_b(p);
                d = d_after;
                ++committed;
            }
        }
        // backward sweep: B -> A
        std::vector<std::size_t> bwd;
        for (std::size_t p : order)
            if (state.in_b(p)) bwd.push_back(p);
        for (std::size_t p : bwd) {
            if (state.count_b() < 2) continue;
            ++out.moves_attempted;
            const double d_after = state.preview_move_b_to_a(p);
            if (d_after >= d + tol) {
                state.move_b_to_a(p);
                d = d_after;
                ++committed;
            }
        }
        out.moves_committed += committed;
        out.trajectory.push_back({out.iterations, d, committed});
        if (committed == 0 || out.iterations >= max_iter) break;
    }
    out.final_distance = d;

    std::vector<std::vector<double>> side_a, side_b;
    std::vector<std::string> ids_a, ids_b;
    for (std::size_t p = 0; p < all.size(); ++p) {
        if (state.in_a(p)) {
            side_a.push_back(state.point(p));
            ids_a.push_back(all[p].id);
        } else {
            side_b.push_back(state.point(p));
            ids_b.push_back(all[p].id);
        }
    }
    const Side member_side = decide_member_side(side_a, side_b);
    if (member_side == Side::A) {
        out.pred_member_ids = std::move(ids_a);
        out.pred_nonmember_ids = std::move(ids_b);
    } else {
        out.pred_member_ids = std::move(ids_b);
        out.pred_nonmember_ids = std::move(ids_a);
    }
    (void)n1;
    out.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

namespace {

std::vector<ProjectedRecord> project_records(const std::vector<BlindRecord>& view,
                                             const ProjectionSpec& spec) {
    std::vector<ProjectedRecord> out;
    out.reserve(view.size());
    for (const auto& r : view)
        out.push_back({*r.id, project(*r.probs, r.true_label, spec)});
    return out;
}

KernelSpec resolve_kernel(const AttackConfig& config, const std::vector<ProjectedRecord>& a,
                          const std::vector<ProjectedRecord>& b) {
    KernelSpec kernel = config.kernel;
    if (config.use_median_sigma &&
        (kernel.family == KernelFamily::Gaussian || kernel.family == KernelFamily::Laplacian)) {
        std::vector<Vec> pool = features_of(a);
        const auto fb = features_of(b);
        pool.insert(pool.end(), fb.begin(), fb.end());
        if (pool.size() >= 2) kernel.sigma = median_heuristic_sigma(pool);
    }
    kernel.validate();
    return kernel;
}

SeparationSpec resolve_separation(const AttackConfig& config, std::size_t batch_size) {
    SeparationSpec sep = config.separation;
    if (sep.method == SeparationMethod::Threshold && sep.threshold_count == 0)
        sep.threshold_count = std::clamp<std::size_t>(batch_size / 4, 2, 1000);
    return sep;
}

}  // namespace

AttackResult attack_batched(const ProbeDataset& target, const ProbeDataset* nonmem,
                            const AttackConfig& config) {
    config.validate();
    if (config.variant == DiffVariant::OneClass)
        throw ValidationError("attack_batched: 1class variant lives in the oneclass module");
    if (config.variant == DiffVariant::DiffWith && (nonmem == nullptr || nonmem->empty()))
        throw ValidationError("diff-w/ requires a nonmember dataset");
    if (target.size() < 2) throw ValidationError("attack_batched: need >= 2 target records");

    const auto target_view = blind_view(target);
    const auto target_proj = project_records(target_view, config.projection);

    std::vector<ProjectedRecord> nonmem_proj;
    if (config.variant == DiffVariant::DiffWith)
        nonmem_proj = project_records(blind_view(*nonmem), config.projection);

    // sigma frozen over the whole attack
    const KernelSpec kernel = resolve_kernel(config, target_proj, nonmem_proj);

    // consecutive batches; a short tail (< 2) merges into the previous batch
    const std::size_t bs = config.effective_batch_size();
    std::vector<std::pair<std::size_t, std::size_t>> batches;  // [begin, end)
    for (std::size_t begin = 0; begin < target.size(); begin += bs)
        batches.emplace_back(begin, std::min(begin + bs, target.size()));
    if (batches.size() >= 2 && batches.back().second - batches.back().first < 2) {
        batches[batches.size() - 2].second = batches.back().second;
        batches.pop_back();
    }

    AttackResult result;
    const std::string variant_name = to_string(config.variant);
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
        const auto [begin, end] = batches[bi];
        const std::vector<ProjectedRecord> batch_proj(target_proj.begin() + begin,
                                                      target_proj.begin() + end);
        DiffOutcome outcome;
        if (config.variant == DiffVariant::DiffWith) {
            // fresh copy of the nonmember set per batch
            outcome = diff_single(nonmem_proj, batch_proj, kernel, config.move_tolerance,
                                  config.max_iterations);
        } else {
            const std::vector<BlindRecord> batch_view(target_view.begin() + begin,
                                                      target_view.begin() + end);
            const SeparationSpec sep_spec = resolve_separation(config, batch_view.size());
            const Separation sep = rough_separation(batch_view, sep_spec, config.projection);
            std::unordered_set<std::string> nonmem_ids(sep.pseudo_nonmember_ids.begin(),
                                                       sep.pseudo_nonmember_ids.end());
            std::vector<ProjectedRecord> part_target, part_nonmem;
            for (const auto& r : batch_proj)
                (nonmem_ids.count(r.id) ? part_nonmem : part_target).push_back(r);
            outcome = diff_bi(part_target, part_nonmem, kernel, config.move_tolerance,
                              config.max_iterations);
        }

        std::unordered_map<std::string, bool> verdict;
        for (const auto& id : outcome.pred_member_ids) verdict[id] = true;
        for (const auto& id : outcome.pred_nonmember_ids) verdict[id] = false;
        for (std::size_t i = begin; i < end; ++i) {
            MembershipPrediction p;
            p.id = target_proj[i].id;
            p.predicted_member = verdict.at(p.id);
            p.variant = variant_name;
            p.iterations = outcome.iterations;
            p.moves = outcome.moves_committed;
            result.predictions.push_back(std::move(p));
        }
        result.batch_logs.push_back({bi, std::move(outcome)});
    }
    return result;
}

MembershipPrediction attack_incremental(const ProbeDataset& batch, const ProbeRecord& record,
                                        const ProbeDataset* nonmem,
                                        const AttackConfig& config) {
    for (const auto& r : batch.records)
        if (r.id == record.id)
            throw ValidationError("attack_incremental: record id already in batch");
    ProbeDataset combined = batch;
    combined.records.push_back(record);
    validate_dataset(combined);

    AttackConfig cfg = config;
    cfg.batch_size = combined.size();
    const AttackResult result = attack_batched(combined, nonmem, cfg);
    for (const auto& p : result.predictions)
        if (p.id == record.id) return p;
    throw NumericalError("attack_incremental: verdict missing for new record");
}

}  // namespace mia
