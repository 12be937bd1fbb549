#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rankprox/image.hpp"
#include "rankprox/ranked_group.hpp"

namespace rankprox {

// The synthesizable distortion catalog. Enumerator values keep the usual
// catalog numbering of the underlying benchmark recipes.
enum class DistortionKind {
    awgn = 1,                  // additive white Gaussian noise, RGB space
    color_noise = 2,           // additive Gaussian noise in YCbCr components
    hf_noise = 5,              // high-frequency Gaussian noise (Fourier high-pass)
    impulse = 6,               // salt & pepper
    quantization = 7,          // uniform intensity quantization
    gaussian_blur = 8,         // circularly symmetric Gaussian blur
    jpeg = 10,                 // block-DCT luminance quantization proxy
    patch_displace = 14,       // 15x15 patches moved to nearby positions
    block_replace = 15,        // 32x32 blocks replaced by a flat color
    mean_shift = 16,           // additive intensity shift, both directions
    contrast = 17,             // contrast scaling about mid-gray, both directions
    saturation = 18,           // chroma scaling (3-channel only)
    mult_noise = 19,           // multiplicative Gaussian noise
    color_quant_dither = 22,   // per-channel quantization with error diffusion
    chromatic_aberration = 23, // opposed horizontal shifts of R and B (3-channel only)
};

struct DistortionSpec {
    DistortionKind kind = DistortionKind::awgn;
    int level = 1;       // 1-based severity level
    int direction = +1;  // +1 or -1, meaningful for mean_shift and contrast only
};

std::string distortion_name(DistortionKind kind);
DistortionKind distortion_from_name(const std::string& name);
bool distortion_needs_color(DistortionKind kind);
int distortion_level_count(DistortionKind kind);

// The published parameter list for a kind, in its printed order. direction
// selects between the negative and positive lists of the two-direction kinds.
const std::vector<double>& distortion_schedule(DistortionKind kind, int direction = +1);

// The parameter value for a spec, with levels ordered mildest to severest.
double distortion_parameter(const DistortionSpec& spec);

// Individual kernels. Noise variances are in squared [0,1] units; shifts and
// quantization steps given in 8-bit counts are converted by the schedule
// mapping before reaching these.
Image add_awgn(const Image& img, double variance, std::uint64_t seed);
Image add_ycbcr_noise(const Image& img, double variance, std::uint64_t seed);
Image add_hf_noise(const Image& img, double variance, std::uint64_t seed);  // needs power-of-two dimensions
Image impulse_noise(const Image& img, double density, std::uint64_t seed);
Image quantize_step(const Image& img, double step01);
Image gaussian_blur(const Image& img, double sigma);  // sigma <= 0 degenerates to identity
Image jpeg_compress(const Image& img, int quality);
Image displace_patches(const Image& img, int count, int patch, int max_offset, std::uint64_t seed);
Image replace_blocks(const Image& img, int count, int block, std::uint64_t seed);
Image mean_shift(const Image& img, double delta);
Image contrast_change(const Image& img, double factor);
Image adjust_saturation(const Image& img, double factor);
Image multiplicative_noise(const Image& img, double variance, std::uint64_t seed);
Image color_quantize_dither(const Image& img, int levels);
Image chromatic_shift(const Image& img, int r_shift, int b_shift);

// Dispatch a spec to its kernel with the schedule's parameter value.
Image apply_distortion(const Image& img, const DistortionSpec& spec, std::uint64_t seed);

// Ranked group for one source image: member 0 is the untouched reference,
// members 1..levels carry increasing severity. phi = -(severity level), so
// higher phi means higher quality. Direction for the two-direction kinds is
// drawn from the seed.
RankedGroup build_distortion_group(const Image& img, DistortionKind kind, int levels, std::uint64_t seed);

}  // namespace rankprox
