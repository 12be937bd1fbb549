#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rankprox/image.hpp"
#include "rankprox/ranked_group.hpp"
#include "rankprox/tensor.hpp"

namespace rankprox {

struct CropGenConfig {
    int k = 5;                // patches per group
    double s = 0.75;          // scale factor between successive patches
    double r = 8.0;           // anchor-region divisor
    int out_size = 64;        // side length every patch is resized to
    // The anchor region is 1/r "the size" of the image. true: 1/r of the
    // area (each dimension shrinks by 1/sqrt(r)); false: 1/r per dimension.
    bool anchor_area = true;

    void validate() const;
};

// Axis-aligned square window in continuous image coordinates.
struct CropDescriptor {
    double cx = 0.0;
    double cy = 0.0;
    double side = 0.0;
};

struct CropSet {
    RankedGroup group;                       // phi = crop area, so outer crops rank higher
    std::vector<CropDescriptor> descriptors; // parallel to group.members
};

// Nested-crop generator: pick an anchor inside the centered anchor region,
// take the largest square centered there that fits the image, then k-1
// progressively scaled-down squares at the same center, and resize all of
// them to out_size. Containment guarantees the true-count order.
CropSet generate_ranked_crops(const Image& img, const CropGenConfig& cfg, std::uint64_t seed);

// Synthetic counting scene: bright isotropic blobs on a noisy background,
// with the exact generating annotations kept alongside.
struct BlobScene {
    Image image;                                    // single channel
    std::vector<std::pair<double, double>> points;  // blob centers (x, y)

    int count() const { return static_cast<int>(points.size()); }
};

// Blob count drawn from Poisson(mean_count); centers uniform over the frame.
BlobScene synth_blob_scene(double mean_count, int size, std::uint64_t seed);

// Exact number of annotations inside the (closed) crop window.
int count_in_crop(const BlobScene& scene, const CropDescriptor& crop);

// Per-pixel density [1,H,W]: one discrete Gaussian of the given std per
// annotation, each normalized so an interior annotation contributes exactly 1
// to the map total. Mass falling outside the frame is dropped.
Tensor density_target(const BlobScene& scene, double sigma);

// Sum over factor x factor blocks, preserving the map total. [1,H,W] with
// H, W divisible by factor.
Tensor downsample_sum(const Tensor& density, int factor);

}  // namespace rankprox
