#include "rankprox/crops.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "rankprox/errors.hpp"

namespace rankprox {

void CropGenConfig::validate() const {
    if (k < 2) throw ConfigError("crop groups need at least 2 patches");
    if (!(s > 0.0) || !(s < 1.0)) throw ConfigError("crop scale factor must lie in (0,1)");
    if (r < 1.0) throw ConfigError("anchor-region divisor must be at least 1");
    if (out_size <= 0) throw ConfigError("crop output size must be positive");
}

CropSet generate_ranked_crops(const Image& img, const CropGenConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (img.width < cfg.out_size || img.height < cfg.out_size)
        throw DataError("image " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                        " is smaller than the crop output size " + std::to_string(cfg.out_size));

    double shrink = cfg.anchor_area ? 1.0 / std::sqrt(cfg.r) : 1.0 / cfg.r;
    double region_w = img.width * shrink;
    double region_h = img.height * shrink;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux((img.width - region_w) / 2.0, (img.width + region_w) / 2.0);
    std::uniform_real_distribution<double> uy((img.height - region_h) / 2.0, (img.height + region_h) / 2.0);
    double cx = ux(rng);
    double cy = uy(rng);

    // largest square centered at the anchor that stays inside the frame
    double side = 2.0 * std::min(std::min(cx, img.width - cx), std::min(cy, img.height - cy));

    CropSet out;
    out.group.source_id = 0;
    for (int i = 0; i < cfg.k; ++i) {
        CropDescriptor d{cx, cy, side};
        out.descriptors.push_back(d);
        out.group.members.push_back(crop_resize(img, cx, cy, side, cfg.out_size));
        out.group.phi.push_back(side * side);
        side *= cfg.s;
    }
    return out;
}

BlobScene synth_blob_scene(double mean_count, int size, std::uint64_t seed) {
    if (size <= 0) throw std::invalid_argument("scene size must be positive");
    if (mean_count < 0) throw std::invalid_argument("mean blob count must be nonnegative");
    std::mt19937_64 rng(seed);
    BlobScene scene;
    scene.image = Image(size, size, 1);

    std::uniform_real_distribution<double> noise(0.0, 0.1);
    for (double& v : scene.image.pix) v = noise(rng);

    std::poisson_distribution<int> count_dist(mean_count);
    int n = mean_count > 0 ? count_dist(rng) : 0;
    std::uniform_real_distribution<double> pos(0.0, static_cast<double>(size));
    const double sigma = 1.5, peak = 0.8;
    int radius = static_cast<int>(std::ceil(3.0 * sigma));
    for (int b = 0; b < n; ++b) {
        double px = pos(rng), py = pos(rng);
        scene.points.emplace_back(px, py);
        int cx = static_cast<int>(std::floor(px));
        int cy = static_cast<int>(std::floor(py));
        for (int dy = -radius; dy <= radius; ++dy)
            for (int dx = -radius; dx <= radius; ++dx) {
                int x = cx + dx, y = cy + dy;
                if (x < 0 || x >= size || y < 0 || y >= size) continue;
                double ddx = x + 0.5 - px, ddy = y + 0.5 - py;
                scene.image.at(0, y, x) += peak * std::exp(-(ddx * ddx + ddy * ddy) / (2.0 * sigma * sigma));
            }
    }
    scene.image.clamp01();
    return scene;
}

int count_in_crop(const BlobScene& scene, const CropDescriptor& crop) {
    double h = crop.side / 2.0;
    int n = 0;
    for (const auto& [px, py] : scene.points)
        if (std::abs(px - crop.cx) <= h && std::abs(py - crop.cy) <= h) ++n;
    return n;
}

Tensor density_target(const BlobScene& scene, double sigma) {
    if (sigma <= 0) throw std::invalid_argument("density kernel std must be positive");
    int size = scene.image.width;
    int h = scene.image.height;
    Tensor map({1, h, size});

    int radius = static_cast<int>(std::ceil(4.0 * sigma));
    int kw = 2 * radius + 1;
    std::vector<double> kernel(static_cast<size_t>(kw) * kw);
    for (const auto& [px, py] : scene.points) {
        int cx = static_cast<int>(std::floor(px));
        int cy = static_cast<int>(std::floor(py));
        // kernel is renormalized per point so each interior annotation adds
        // exactly 1 to the map total
        double total = 0.0;
        for (int dy = -radius; dy <= radius; ++dy)
            for (int dx = -radius; dx <= radius; ++dx) {
                double ddx = cx + dx + 0.5 - px, ddy = cy + dy + 0.5 - py;
                double v = std::exp(-(ddx * ddx + ddy * ddy) / (2.0 * sigma * sigma));
                kernel[static_cast<size_t>(dy + radius) * kw + (dx + radius)] = v;
                total += v;
            }
        for (int dy = -radius; dy <= radius; ++dy)
            for (int dx = -radius; dx <= radius; ++dx) {
                int x = cx + dx, y = cy + dy;
                if (x < 0 || x >= size || y < 0 || y >= h) continue;
                map[static_cast<long long>(y) * size + x] +=
                    kernel[static_cast<size_t>(dy + radius) * kw + (dx + radius)] / total;
            }
    }
    return map;
}

Tensor downsample_sum(const Tensor& density, int factor) {
    if (density.rank() != 3 || density.dim(0) != 1)
        throw std::invalid_argument("density map must be [1,H,W], got " + Tensor::shape_str(density.shape()));
    if (factor <= 0 || density.dim(1) % factor != 0 || density.dim(2) % factor != 0)
        throw std::invalid_argument("density map " + Tensor::shape_str(density.shape()) +
                                    " is not divisible by block factor " + std::to_string(factor));
    int oh = density.dim(1) / factor, ow = density.dim(2) / factor;
    int w = density.dim(2);
    Tensor out({1, oh, ow});
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int dy = 0; dy < factor; ++dy)
                for (int dx = 0; dx < factor; ++dx)
                    acc += density[static_cast<long long>(y * factor + dy) * w + (x * factor + dx)];
            out[static_cast<long long>(y) * ow + x] = acc;
        }
    return out;
}

}  // namespace rankprox
