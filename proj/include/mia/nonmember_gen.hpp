#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mia/data_model.hpp"
#include "mia/projection.hpp"

namespace mia {

// A raw (pre-probe) input sample: a flat feature vector, or a 2-D
// grayscale grid for the image operators.
struct RawSample {
    std::vector<double> features;
    std::size_t rows = 0;  // 0 for flat vectors
    std::size_t cols = 0;
    std::string domain_tag;

    bool is_grid() const { return rows > 0 && cols > 0; }
};

enum class ImageOp { Laplace, Sobel, Scharr };
ImageOp image_op_from_string(const std::string& s);

// 3x3 gradient/laplacian operator, edge-replicated borders, output clipped
// to [0,1]. Shape-preserving; constant inputs map to all zeros.
RawSample transform_sample(const RawSample& img, ImageOp op);

enum class NoiseKind { Gaussian, SaltPepper };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::Gaussian;
    double variance = 0.01;  // gaussian
    double rate = 0.05;      // salt_pepper flip probability
};

// Adds seeded noise; gaussian output clipped to [0,1].
RawSample perturb_random(const RawSample& x, const NoiseSpec& noise, std::uint64_t seed);

// i.i.d. uniform [0,1] sample of the given length.
RawSample generate_random(std::size_t dim, std::uint64_t seed);
RawSample generate_random_grid(std::size_t rows, std::size_t cols, std::uint64_t seed);

enum class SeparationMethod { Threshold, KMeans, Agglomerative };
SeparationMethod separation_method_from_string(const std::string& s);
std::string to_string(SeparationMethod m);

struct SeparationSpec {
    SeparationMethod method = SeparationMethod::Threshold;
    // Threshold method: number of lowest-confidence records declared
    // pseudo-nonmembers. 0 means the default of min(1000, n/4).
    std::size_t threshold_count = 0;
    std::uint64_t rng_seed = 0;
};

struct Separation {
    std::vector<std::string> pseudo_nonmember_ids;
    std::vector<std::string> pseudo_target_ids;
};

// Roughly divides a target dataset into a pseudo-nonmember and a
// pseudo-member part. Always returns an exhaustive, disjoint partition.
Separation rough_separation(const ProbeDataset& dataset, const SeparationSpec& spec,
                            const ProjectionSpec& projection);
Separation rough_separation(const std::vector<BlindRecord>& records,
                            const SeparationSpec& spec, const ProjectionSpec& projection);

}  // namespace mia
