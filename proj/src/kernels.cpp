#include "mia/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "mia/simd.hpp"

namespace mia {

KernelFamily kernel_family_from_string(const std::string& s) {
    if (s == "gaussian") return KernelFamily::Gaussian;
    if (s == "laplacian") return KernelFamily::Laplacian;
    if (s == "linear") return KernelFamily::Linear;
    if (s == "sigmoid") return KernelFamily::Sigmoid;
    if (s == "polynomial") return KernelFamily::Polynomial;
    throw ValidationError("unknown kernel family: " + s);
}

std::string to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::Gaussian: return "gaussian";
        case KernelFamily::Laplacian: return "laplacian";
        case KernelFamily::Linear: return "linear";
        case KernelFamily::Sigmoid: return "sigmoid";
        case KernelFamily::Polynomial: return "polynomial";
    }
    return "?";
}

void KernelSpec::validate() const {
    if (family == KernelFamily::Gaussian || family == KernelFamily::Laplacian) {
        if (!(sigma > 0.0)) throw ValidationError("kernel sigma must be positive");
        if (norm_exponent != 1 && norm_exponent != 2)
            throw ValidationError("norm_exponent must be 1 or 2");
    }
    if (family == KernelFamily::Polynomial && !(degree > 0.0))
        throw ValidationError("polynomial degree must be positive");
}

static double norm_dist(const Vec& a, const Vec& b, int exponent) {
    if (exponent == 1) return simd::l1(a.data(), b.data(), a.size());
    return std::sqrt(simd::squared_l2(a.data(), b.data(), a.size()));
}

double kernel_eval(const Vec& a, const Vec& b, const KernelSpec& spec) {
    if (a.size() != b.size())
        throw ValidationError("kernel_eval: dimension mismatch (" + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()) + ")");
    switch (spec.family) {
        case KernelFamily::Gaussian: {
            double arg;
            if (spec.square_distance && spec.norm_exponent == 2) {
                arg = simd::squared_l2(a.data(), b.data(), a.size());
            } else {
                const double d = norm_dist(a, b, spec.norm_exponent);
                arg = spec.square_distance ? d * d : d;
            }
            return std::exp(-arg / (2.0 * spec.sigma * spec.sigma));
        }
        case KernelFamily::Laplacian:
            return std::exp(-norm_dist(a, b, spec.norm_exponent) / spec.sigma);
        case KernelFamily::Linear:
            return simd::dot(a.data(), b.data(), a.size());
        case KernelFamily::Sigmoid:
            return std::tanh(spec.degree * simd::dot(a.data(), b.data(), a.size()) + spec.coef);
        case KernelFamily::Polynomial:
            return std::pow(simd::dot(a.data(), b.data(), a.size()) + spec.coef, spec.degree);
    }
    throw ValidationError("kernel_eval: bad family");
}

double mmd(const std::vector<Vec>& x, const std::vector<Vec>& y, const KernelSpec& spec) {
    if (x.empty() || y.empty()) throw ValidationError("mmd: empty set");
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const auto& a : x)
        for (const auto& b : x) sxx += kernel_eval(a, b, spec);
    for (const auto& a : y)
        for (const auto& b : y) syy += kernel_eval(a, b, spec);
    for (const auto& a : x)
        for (const auto& b : y) sxy += kernel_eval(a, b, spec);
    const double m2 = sxx / (nx * nx) + syy / (ny * ny) - 2.0 * sxy / (nx * ny);
    return std::sqrt(std::max(0.0, m2));
}

double median_heuristic_sigma(const std::vector<Vec>& points) {
    if (points.size() < 2) throw ValidationError("median_heuristic_sigma: need >= 2 points");
    std::vector<double> dists;
    dists.reserve(points.size() * (points.size() - 1) / 2);
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            dists.push_back(std::sqrt(
                simd::squared_l2(points[i].data(), points[j].data(), points[i].size())));
    const std::size_t n = dists.size();
    std::nth_element(dists.begin(), dists.begin() + (n - 1) / 2, dists.end());
    double med = dists[(n - 1) / 2];
    if (n % 2 == 0) {
        std::nth_element(dists.begin(), dists.begin() + n / 2, dists.end());
        med = 0.5 * (med + dists[n / 2]);
    }
    return med > 0.0 ? med : 1.0;
}

MmdState::MmdState(const std::vector<Vec>& a, const std::vector<Vec>& b,
                   const KernelSpec& spec) {
    if (a.empty() || b.empty()) throw ValidationError("MmdState: empty set");
    spec.validate();
    points_.reserve(a.size() + b.size());
    points_.insert(points_.end(), a.begin(), a.end());
    points_.insert(points_.end(), b.begin(), b.end());
    const std::size_t n = points_.size();
    const std::size_t dim = points_[0].size();
    for (const auto& p : points_)
        if (p.size() != dim) throw ValidationError("MmdState: dimension mismatch");

    gram_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        gram_[i * n + i] = kernel_eval(points_[i], points_[i], spec);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double k = kernel_eval(points_[i], points_[j], spec);
            gram_[i * n + j] = k;
            gram_[j * n + i] = k;
        }
    }

    in_a_.assign(n, 0);
    in_b_.assign(n, 0);
    for (std::size_t i = 0; i < a.size(); ++i) in_a_[i] = 1;
    for (std::size_t i = a.size(); i < n; ++i) in_b_[i] = 1;
    n_a_ = a.size();
    n_b_ = b.size();

    row_a_.assign(n, 0.0);
    row_b_.assign(n, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
        const double* row = gram_.data() + p * n;
        double sa = 0.0, sb = 0.0;
        for (std::size_t q = 0; q < n; ++q) {
            if (in_a_[q]) sa += row[q];
            else sb += row[q];
        }
        row_a_[p] = sa;
        row_b_[p] = sb;
    }
    for (std::size_t p = 0; p < n; ++p) {
        if (in_a_[p]) {
            sum_aa_ += row_a_[p];
            sum_ab_ += row_b_[p];
        } else {
            sum_bb_ += row_b_[p];
        }
    }
}

double MmdState::distance_from(double saa, double sbb, double sab,
                               std::size_t na, std::size_t nb) const {
    const double fa = static_cast<double>(na);
    const double fb = static_cast<double>(nb);
    const double m2 = saa / (fa * fa) + sbb / (fb * fb) - 2.0 * sab / (fa * fb);
    return std::sqrt(std::max(0.0, m2));
}

double MmdState::distance() const { return distance_from(sum_aa_, sum_bb_, sum_ab_, n_a_, n_b_); }

double MmdState::preview_move_a_to_b(std::size_t p) const {
    if (p >= points_.size() || !in_a_[p] || in_b_[p])
        throw ValidationError("preview_move_a_to_b: bad point");
    if (n_a_ < 2) throw ValidationError("preview_move_a_to_b: move would empty side A");
    const double kpp = gram(p, p);
    const double saa = sum_aa_ - 2.0 * row_a_[p] + kpp;
    const double sbb = sum_bb_ + 2.0 * row_b_[p] + kpp;
    const double sab = sum_ab_ - row_b_[p] + row_a_[p] - kpp;
    return distance_from(saa, sbb, sab, n_a_ - 1, n_b_ + 1);
}

double MmdState::preview_move_b_to_a(std::size_t p) const {
    if (p >= points_.size() || !in_b_[p] || in_a_[p])
        throw ValidationError("preview_move_b_to_a: bad point");
    if (n_b_ < 2) throw ValidationError("preview_move_b_to_a: move would empty side B");
    const double kpp = gram(p, p);
    const double sbb = sum_bb_ - 2.0 * row_b_[p] + kpp;
    const double saa = sum_aa_ + 2.0 * row_a_[p] + kpp;
    const double sab = sum_ab_ - row_a_[p] + row_b_[p] - kpp;
    return distance_from(saa, sbb, sab, n_a_ + 1, n_b_ - 1);
}

void MmdState::move_a_to_b(std::size_t p) {
    remove_from_a(p);
    add_to_b(p);
}

void MmdState::move_b_to_a(std::size_t p) {
    if (p >= points_.size() || !in_b_[p] || in_a_[p])
        throw ValidationError("move_b_to_a: bad point");
    if (n_b_ < 2) throw ValidationError("move_b_to_a: move would empty side B");
    const std::size_t n = points_.size();
    const double* row = gram_.data() + p * n;
    // remove from B
    sum_bb_ -= 2.0 * row_b_[p] - gram(p, p);
    sum_ab_ -= row_a_[p];
    simd::axpy(row_b_.data(), row, -1.0, n);
    in_b_[p] = 0;
    --n_b_;
    // add to A
    sum_aa_ += 2.0 * row_a_[p] + gram(p, p);
    sum_ab_ += row_b_[p];
    simd::axpy(row_a_.data(), row, 1.0, n);
    in_a_[p] = 1;
    ++n_a_;
}

void MmdState::add_to_b(std::size_t p) {
    if (p >= points_.size() || in_b_[p]) throw ValidationError("add_to_b: bad point");
    const std::size_t n = points_.size();
    sum_bb_ += 2.0 * row_b_[p] + gram(p, p);
    sum_ab_ += row_a_[p];
    simd::axpy(row_b_.data(), gram_.data() + p * n, 1.0, n);
    in_b_[p] = 1;
    ++n_b_;
}

void MmdState::remove_from_a(std::size_t p) {
    if (p >= points_.size() || !in_a_[p]) throw ValidationError("remove_from_a: bad point");
    if (n_a_ < 2) throw ValidationError("remove_from_a: would empty side A");
    const std::size_t n = points_.size();
    sum_aa_ -= 2.0 * row_a_[p] - gram(p, p);
    sum_ab_ -= row_b_[p];
    simd::axpy(row_a_.data(), gram_.data() + p * n, -1.0, n);
    in_a_[p] = 0;
    --n_a_;
}

double MmdState::recompute_distance() const {
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    const std::size_t n = points_.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double k = gram_[i * n + j];
            if (in_a_[i] && in_a_[j]) saa += k;
            if (in_b_[i] && in_b_[j]) sbb += k;
            if (in_a_[i] && in_b_[j]) sab += k;
        }
    }
    return distance_from(saa, sbb, sab, n_a_, n_b_);
}

}  // namespace mia
