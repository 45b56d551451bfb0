#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mia/error.hpp"

namespace mia {

using Vec = std::vector<double>;

enum class KernelFamily { Gaussian, Laplacian, Linear, Sigmoid, Polynomial };

KernelFamily kernel_family_from_string(const std::string& s);
std::string to_string(KernelFamily f);

struct KernelSpec {
    KernelFamily family = KernelFamily::Gaussian;
    double sigma = 1.0;           // bandwidth (gaussian/laplacian)
    double degree = 3.0;          // polynomial degree / sigmoid slope
    double coef = 1.0;            // additive constant (polynomial/sigmoid)
    int norm_exponent = 2;        // 1 or 2, distance norm inside exponential kernels
    bool square_distance = true;  // gaussian only: square the norm in the exponent

    void validate() const;
};

// k(a, b) under the given spec. Symmetric; gaussian/laplacian map equal
// inputs to 1.
double kernel_eval(const Vec& a, const Vec& b, const KernelSpec& spec);

// Biased empirical MMD between two non-empty sets:
//   sqrt(max(0, sum_xx/n_x^2 + sum_yy/n_y^2 - 2 sum_xy/(n_x n_y)))
double mmd(const std::vector<Vec>& x, const std::vector<Vec>& y, const KernelSpec& spec);

// Median of pairwise L2 distances; 1.0 when the median is zero.
double median_heuristic_sigma(const std::vector<Vec>& points);

// Incrementally updatable MMD state over two point sets A and B sharing a
// common pool. The full Gram matrix and per-point row sums are cached at
// init (O(n^2)); previews of single-point moves are O(1) and commits are
// O(n). A point may sit on both sides at once, which diff_single's
// commit-into-nonmem / deferred-removal semantics require.
class MmdState {
public:
    // Pool = a followed by b; side A = [0, a.size()), side B = the rest.
    MmdState(const std::vector<Vec>& a, const std::vector<Vec>& b, const KernelSpec& spec);

    std::size_t pool_size() const { return points_.size(); }
    std::size_t count_a() const { return n_a_; }
    std::size_t count_b() const { return n_b_; }
    bool in_a(std::size_t p) const { return in_a_[p] != 0; }
    bool in_b(std::size_t p) const { return in_b_[p] != 0; }
    const Vec& point(std::size_t p) const { return points_[p]; }

    // Current distance from the cached accumulators.
    double distance() const;

    // Distance that would hold after transferring point p from one side to
    // the other (p must be on the source side and not on the target side).
    double preview_move_a_to_b(std::size_t p) const;
    double preview_move_b_to_a(std::size_t p) const;

    // Commit the previewed transfer.
    void move_a_to_b(std::size_t p);
    void move_b_to_a(std::size_t p);

    // Set-editing primitives (diff_single's iteration bookkeeping).
    void add_to_b(std::size_t p);
    void remove_from_a(std::size_t p);

    // From-scratch recomputation of the distance; audit only.
    double recompute_distance() const;

private:
    double gram(std::size_t i, std::size_t j) const { return gram_[i * points_.size() + j]; }
    double distance_from(double saa, double sbb, double sab,
                         std::size_t na, std::size_t nb) const;

    std::vector<Vec> points_;
    std::vector<double> gram_;       // dense symmetric, pool x pool
    std::vector<std::uint8_t> in_a_, in_b_;
    std::vector<double> row_a_, row_b_;  // row_a_[p] = sum over q in A of k(p, q)
    double sum_aa_ = 0.0, sum_bb_ = 0.0, sum_ab_ = 0.0;
    std::size_t n_a_ = 0, n_b_ = 0;
};

}  // namespace mia
