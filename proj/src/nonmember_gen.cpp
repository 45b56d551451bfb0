#include "mia/nonmember_gen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mia/simd.hpp"

namespace mia {

ImageOp image_op_from_string(const std::string& s) {
    if (s == "laplace") return ImageOp::Laplace;
    if (s == "sobel") return ImageOp::Sobel;
    if (s == "scharr") return ImageOp::Scharr;
    throw ValidationError("unknown image operator: " + s);
}

SeparationMethod separation_method_from_string(const std::string& s) {
    if (s == "threshold") return SeparationMethod::Threshold;
    if (s == "kmeans") return SeparationMethod::KMeans;
    if (s == "agglomerative") return SeparationMethod::Agglomerative;
    throw ValidationError("unknown separation method: " + s);
}

std::string to_string(SeparationMethod m) {
    switch (m) {
        case SeparationMethod::Threshold: return "threshold";
        case SeparationMethod::KMeans: return "kmeans";
        case SeparationMethod::Agglomerative: return "agglomerative";
    }
    return "?";
}

namespace {

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

// Pixel with edge replication.
double px(const RawSample& img, std::ptrdiff_t r, std::ptrdiff_t c) {
    const auto rr = std::clamp<std::ptrdiff_t>(r, 0, static_cast<std::ptrdiff_t>(img.rows) - 1);
    const auto cc = std::clamp<std::ptrdiff_t>(c, 0, static_cast<std::ptrdiff_t>(img.cols) - 1);
    return img.features[static_cast<std::size_t>(rr) * img.cols + static_cast<std::size_t>(cc)];
}

}  // namespace

RawSample transform_sample(const RawSample& img, ImageOp op) {
    if (!img.is_grid() || img.rows < 3 || img.cols < 3)
        throw ValidationError("transform_sample: grid must be at least 3x3");

    // Horizontal-derivative stencils; the vertical one is the transpose.
    // Sobel: [-1 0 1; -2 0 2; -1 0 1], Scharr: [-3 0 3; -10 0 10; -3 0 3].
    const double wside = (op == ImageOp::Scharr) ? 3.0 : 1.0;
    const double wmid = (op == ImageOp::Scharr) ? 10.0 : 2.0;

    RawSample out = img;
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(img.rows); ++r) {
        for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(img.cols); ++c) {
            double v;
            if (op == ImageOp::Laplace) {
                v = px(img, r - 1, c) + px(img, r + 1, c) + px(img, r, c - 1) +
                    px(img, r, c + 1) - 4.0 * px(img, r, c);
            } else {
                const double gx = wside * (px(img, r - 1, c + 1) - px(img, r - 1, c - 1)) +
                                  wmid * (px(img, r, c + 1) - px(img, r, c - 1)) +
                                  wside * (px(img, r + 1, c + 1) - px(img, r + 1, c - 1));
                const double gy = wside * (px(img, r + 1, c - 1) - px(img, r - 1, c - 1)) +
                                  wmid * (px(img, r + 1, c) - px(img, r - 1, c)) +
                                  wside * (px(img, r + 1, c + 1) - px(img, r - 1, c + 1));
                v = std::sqrt(gx * gx + gy * gy);
            }
            out.features[static_cast<std::size_t>(r) * img.cols + static_cast<std::size_t>(c)] =
                clip01(v);
        }
    }
    return out;
}

RawSample perturb_random(const RawSample& x, const NoiseSpec& noise, std::uint64_t seed) {
    RawSample out = x;
    std::mt19937_64 rng(seed);
    if (noise.kind == NoiseKind::Gaussian) {
        if (!(noise.variance > 0.0))
            throw ValidationError("perturb_random: gaussian variance must be positive");
        std::normal_distribution<double> dist(0.0, std::sqrt(noise.variance));
        for (double& v : out.features) v = clip01(v + dist(rng));
    } else {
        if (!(noise.rate > 0.0 && noise.rate < 1.0) && noise.rate != 1.0)
            throw ValidationError("perturb_random: salt_pepper rate must be in (0,1]");
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (double& v : out.features) {
            const double roll = u(rng);
            if (roll < noise.rate / 2.0) v = 0.0;
            else if (roll < noise.rate) v = 1.0;
        }
    }
    return out;
}

RawSample generate_random(std::size_t dim, std::uint64_t seed) {
    if (dim == 0) throw ValidationError("generate_random: dim must be positive");
    RawSample out;
    out.features.resize(dim);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : out.features) v = u(rng);
    out.domain_tag = "random";
    return out;
}

RawSample generate_random_grid(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    if (rows == 0 || cols == 0) throw ValidationError("generate_random_grid: empty shape");
    RawSample out = generate_random(rows * cols, seed);
    out.rows = rows;
    out.cols = cols;
    return out;
}

namespace {

using Points = std::vector<std::vector<double>>;

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    return simd::squared_l2(a.data(), b.data(), a.size());
}

// 2-means with k-means++ seeding; returns cluster assignment per point.
// Throws on an empty cluster after one re-seed.
std::vector<int> two_means(const Points& pts, std::uint64_t seed) {
    const std::size_t n = pts.size();
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < 2; ++attempt) {
        // k-means++ seeding
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::vector<double> c0 = pts[pick(rng)];
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = sq_dist(pts[i], c0);
        std::discrete_distribution<std::size_t> far(w.begin(), w.end());
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        if (total == 0.0) continue;  // all points identical, re-seed then fail
        std::vector<double> c1 = pts[far(rng)];

        std::vector<int> assign(n, 0);
        for (int iter = 0; iter < 100; ++iter) {
            bool changed = false;
            std::size_t n0 = 0, n1 = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const int a = sq_dist(pts[i], c0) <= sq_dist(pts[i], c1) ? 0 : 1;
                if (a != assign[i]) changed = true;
                assign[i] = a;
                (a == 0 ? n0 : n1)++;
            }
            if (n0 == 0 || n1 == 0) break;  // degenerate, try re-seed
            std::vector<double> m0(pts[0].size(), 0.0), m1(pts[0].size(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                auto& m = assign[i] == 0 ? m0 : m1;
                for (std::size_t d = 0; d < m.size(); ++d) m[d] += pts[i][d];
            }
            for (double& v : m0) v /= static_cast<double>(n0);
            for (double& v : m1) v /= static_cast<double>(n1);
            c0 = std::move(m0);
            c1 = std::move(m1);
            if (!changed) return assign;
        }
        std::size_t n0 = static_cast<std::size_t>(std::count(assign.begin(), assign.end(), 0));
        if (n0 > 0 && n0 < n) return assign;
    }
    throw ValidationError("rough_separation: k-means degenerate (empty cluster after re-seed)");
}

// Average-linkage agglomerative clustering down to 2 clusters.
std::vector<int> two_agglomerative(const Points& pts) {
    const std::size_t n = pts.size();
    // Lance-Williams on squared... use plain Euclidean distances; average
    // linkage averages pairwise distances between cluster members.
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            dist[i][j] = dist[j][i] = std::sqrt(sq_dist(pts[i], pts[j]));

    std::vector<std::size_t> size(n, 1);
    std::vector<bool> active(n, true);
    std::vector<std::vector<std::size_t>> members(n);
    for (std::size_t i = 0; i < n; ++i) members[i] = {i};

    std::size_t remaining = n;
    while (remaining > 2) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!active[j]) continue;
                if (dist[i][j] < best) {
                    best = dist[i][j];
                    bi = i;
                    bj = j;
                }
            }
        }
        // merge bj into bi; average-linkage update
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == bi || k == bj) continue;
            const double si = static_cast<double>(size[bi]);
            const double sj = static_cast<double>(size[bj]);
            dist[bi][k] = dist[k][bi] = (si * dist[bi][k] + sj * dist[bj][k]) / (si + sj);
        }
        size[bi] += size[bj];
        members[bi].insert(members[bi].end(), members[bj].begin(), members[bj].end());
        active[bj] = false;
        --remaining;
    }

    std::vector<int> assign(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (active[i]) {
            for (std::size_t m : members[i]) assign[m] = 0;
            break;  // first active cluster gets label 0
        }
    }
    return assign;
}

}  // namespace

Separation rough_separation(const std::vector<BlindRecord>& records,
                            const SeparationSpec& spec, const ProjectionSpec& projection) {
    const std::size_t n = records.size();

    if (spec.method == SeparationMethod::Threshold) {
        std::size_t count = spec.threshold_count;
        if (count == 0) count = std::min<std::size_t>(1000, std::max<std::size_t>(1, n / 4));
        if (count >= n)
            throw ValidationError("rough_separation: threshold_count >= dataset size");
        // order by (top-1 probability asc, id asc)
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> top1(n);
        for (std::size_t i = 0; i < n; ++i)
            top1[i] = *std::max_element(records[i].probs->begin(), records[i].probs->end());
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (top1[a] != top1[b]) return top1[a] < top1[b];
            return *records[a].id < *records[b].id;
        });
        Separation sep;
        for (std::size_t i = 0; i < n; ++i) {
            auto& dst = (i < count) ? sep.pseudo_nonmember_ids : sep.pseudo_target_ids;
            dst.push_back(*records[order[i]].id);
        }
        return sep;
    }

    if (n < 4) throw ValidationError("rough_separation: clustering needs >= 4 records");
    const Points pts = project_all(records, projection);
    std::vector<int> assign = (spec.method == SeparationMethod::KMeans)
                                  ? two_means(pts, spec.rng_seed)
                                  : two_agglomerative(pts);

    // The cluster with the lower mean top-1 probability is pseudo-nonmember.
    double mean0 = 0.0, mean1 = 0.0;
    std::size_t n0 = 0, n1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = *std::max_element(records[i].probs->begin(), records[i].probs->end());
        if (assign[i] == 0) { mean0 += t; ++n0; }
        else { mean1 += t; ++n1; }
    }
    if (n0 == 0 || n1 == 0)
        throw ValidationError("rough_separation: clustering produced an empty cluster");
    mean0 /= static_cast<double>(n0);
    mean1 /= static_cast<double>(n1);
    const int nonmem_label = (mean0 < mean1) ? 0 : 1;

    Separation sep;
    for (std::size_t i = 0; i < n; ++i) {
        auto& dst = (assign[i] == nonmem_label) ? sep.pseudo_nonmember_ids
                                                : sep.pseudo_target_ids;
        dst.push_back(*records[i].id);
    }
    return sep;
}

Separation rough_separation(const ProbeDataset& dataset, const SeparationSpec& spec,
                            const ProjectionSpec& projection) {
    return rough_separation(blind_view(dataset), spec, projection);
}

}  // namespace mia
