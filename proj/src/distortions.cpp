#include "rankprox/distortions.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "rankprox/errors.hpp"

namespace rankprox {

namespace {

const std::vector<double> kSchedAwgn = {0.001, 0.005, 0.01, 0.05};
const std::vector<double> kSchedColorNoise = {0.0140, 0.0198, 0.0343, 0.0524};
const std::vector<double> kSchedHfNoise = {0.001, 0.005, 0.01, 0.05};
const std::vector<double> kSchedImpulse = {0.005, 0.01, 0.05, 0.1};
const std::vector<double> kSchedQuant = {27, 39, 55, 76};
const std::vector<double> kSchedBlur = {1.2, 2.5, 6.5, 15.2};
const std::vector<double> kSchedJpeg = {43, 12, 7, 4};
const std::vector<double> kSchedPatch = {30, 70, 150, 300};
const std::vector<double> kSchedBlock = {2, 4, 8, 16};
const std::vector<double> kSchedMeanShiftNeg = {-60, -45, -30, -15};
const std::vector<double> kSchedMeanShiftPos = {15, 30, 45, 60};
const std::vector<double> kSchedContrastDown = {0.85, 0.7, 0.55, 0.4};
const std::vector<double> kSchedContrastUp = {1.2, 1.4, 1.6, 1.8};
const std::vector<double> kSchedSaturation = {0.4, 0, -0.4, -0.8};
const std::vector<double> kSchedMultNoise = {0.05, 0.09, 0.13, 0.2};
const std::vector<double> kSchedColorQuant = {64, 32, 16, 8};
const std::vector<double> kSchedChromaR = {2, 6, 10, 14};
const std::vector<double> kSchedChromaB = {1, 3, 5, 7};

[[noreturn]] void unsupported(DistortionKind kind) {
    throw ConfigError("unsupported distortion kind " + std::to_string(static_cast<int>(kind)));
}

}  // namespace

std::string distortion_name(DistortionKind kind) {
    switch (kind) {
        case DistortionKind::awgn: return "awgn";
        case DistortionKind::color_noise: return "color_noise";
        case DistortionKind::hf_noise: return "hf_noise";
        case DistortionKind::impulse: return "impulse";
        case DistortionKind::quantization: return "quantization";
        case DistortionKind::gaussian_blur: return "gaussian_blur";
        case DistortionKind::jpeg: return "jpeg";
        case DistortionKind::patch_displace: return "patch_displace";
        case DistortionKind::block_replace: return "block_replace";
        case DistortionKind::mean_shift: return "mean_shift";
        case DistortionKind::contrast: return "contrast";
        case DistortionKind::saturation: return "saturation";
        case DistortionKind::mult_noise: return "mult_noise";
        case DistortionKind::color_quant_dither: return "color_quant_dither";
        case DistortionKind::chromatic_aberration: return "chromatic_aberration";
    }
    unsupported(kind);
}

DistortionKind distortion_from_name(const std::string& name) {
    static const std::vector<DistortionKind> all = {
        DistortionKind::awgn,          DistortionKind::color_noise,  DistortionKind::hf_noise,
        DistortionKind::impulse,       DistortionKind::quantization, DistortionKind::gaussian_blur,
        DistortionKind::jpeg,          DistortionKind::patch_displace, DistortionKind::block_replace,
        DistortionKind::mean_shift,    DistortionKind::contrast,     DistortionKind::saturation,
        DistortionKind::mult_noise,    DistortionKind::color_quant_dither,
        DistortionKind::chromatic_aberration,
    };
    for (DistortionKind k : all)
        if (distortion_name(k) == name) return k;
    throw ConfigError("unknown distortion kind '" + name + "'");
}

bool distortion_needs_color(DistortionKind kind) {
    return kind == DistortionKind::saturation || kind == DistortionKind::chromatic_aberration;
}

int distortion_level_count(DistortionKind kind) { return static_cast<int>(distortion_schedule(kind).size()); }

const std::vector<double>& distortion_schedule(DistortionKind kind, int direction) {
    switch (kind) {
        case DistortionKind::awgn: return kSchedAwgn;
        case DistortionKind::color_noise: return kSchedColorNoise;
        case DistortionKind::hf_noise: return kSchedHfNoise;
        case DistortionKind::impulse: return kSchedImpulse;
        case DistortionKind::quantization: return kSchedQuant;
        case DistortionKind::gaussian_blur: return kSchedBlur;
        case DistortionKind::jpeg: return kSchedJpeg;
        case DistortionKind::patch_displace: return kSchedPatch;
        case DistortionKind::block_replace: return kSchedBlock;
        case DistortionKind::mean_shift: return direction < 0 ? kSchedMeanShiftNeg : kSchedMeanShiftPos;
        case DistortionKind::contrast: return direction < 0 ? kSchedContrastDown : kSchedContrastUp;
        case DistortionKind::saturation: return kSchedSaturation;
        case DistortionKind::mult_noise: return kSchedMultNoise;
        case DistortionKind::color_quant_dither: return kSchedColorQuant;
        case DistortionKind::chromatic_aberration: return kSchedChromaR;
    }
    unsupported(kind);
}

double distortion_parameter(const DistortionSpec& spec) {
    const std::vector<double>& sched = distortion_schedule(spec.kind, spec.direction);
    if (spec.level < 1 || spec.level > static_cast<int>(sched.size()))
        throw ConfigError("distortion level " + std::to_string(spec.level) + " outside schedule for " +
                          distortion_name(spec.kind));
    // The negative mean-shift list is printed in ascending numeric order;
    // severity there grows with the magnitude, so index from the far end.
    if (spec.kind == DistortionKind::mean_shift && spec.direction < 0)
        return sched[sched.size() - static_cast<size_t>(spec.level)];
    return sched[static_cast<size_t>(spec.level) - 1];
}

namespace {

std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

void require_color(const Image& img, DistortionKind kind) {
    if (img.channels != 3)
        throw DataError("distortion '" + distortion_name(kind) + "' needs a 3-channel image");
}

// ---- radix-2 FFT over power-of-two grids --------------------------------

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
    size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        double ang = 2.0 * M_PI / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

void fft2(std::vector<std::complex<double>>& grid, int w, int h, bool inverse) {
    std::vector<std::complex<double>> line;
    for (int y = 0; y < h; ++y) {
        line.assign(grid.begin() + static_cast<long>(y) * w, grid.begin() + static_cast<long>(y + 1) * w);
        fft_inplace(line, inverse);
        std::copy(line.begin(), line.end(), grid.begin() + static_cast<long>(y) * w);
    }
    line.resize(static_cast<size_t>(h));
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) line[static_cast<size_t>(y)] = grid[static_cast<size_t>(y) * w + x];
        fft_inplace(line, inverse);
        for (int y = 0; y < h; ++y) grid[static_cast<size_t>(y) * w + x] = line[static_cast<size_t>(y)];
    }
}

// ---- 8x8 block DCT for the compression proxy ----------------------------

struct Dct8 {
    double c[8][8];
    Dct8() {
        for (int u = 0; u < 8; ++u)
            for (int x = 0; x < 8; ++x)
                c[u][x] = std::cos((2 * x + 1) * u * M_PI / 16.0) * (u == 0 ? std::sqrt(1.0 / 8.0) : 0.5);
    }
};

const Dct8 kDct;

void dct8x8(const double in[8][8], double out[8][8], bool inverse) {
    double tmp[8][8];
    if (!inverse) {
        for (int u = 0; u < 8; ++u)
            for (int y = 0; y < 8; ++y) {
                double acc = 0.0;
                for (int x = 0; x < 8; ++x) acc += kDct.c[u][x] * in[y][x];
                tmp[y][u] = acc;
            }
        for (int u = 0; u < 8; ++u)
            for (int v = 0; v < 8; ++v) {
                double acc = 0.0;
                for (int y = 0; y < 8; ++y) acc += kDct.c[v][y] * tmp[y][u];
                out[v][u] = acc;
            }
    } else {
        for (int v = 0; v < 8; ++v)
            for (int x = 0; x < 8; ++x) {
                double acc = 0.0;
                for (int u = 0; u < 8; ++u) acc += kDct.c[u][x] * in[v][u];
                tmp[v][x] = acc;
            }
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) {
                double acc = 0.0;
                for (int v = 0; v < 8; ++v) acc += kDct.c[v][y] * tmp[v][x];
                out[y][x] = acc;
            }
    }
}

const int kJpegLumaBase[64] = {16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
                               14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
                               18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
                               49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

}  // namespace

Image add_awgn(const Image& img, double variance, std::uint64_t seed) {
    auto rng = make_rng(seed);
    std::normal_distribution<double> noise(0.0, std::sqrt(variance));
    Image out = img;
    for (double& v : out.pix) v += noise(rng);
    out.clamp01();
    return out;
}

Image add_ycbcr_noise(const Image& img, double variance, std::uint64_t seed) {
    auto rng = make_rng(seed);
    std::normal_distribution<double> noise(0.0, std::sqrt(variance));
    Image out = img;
    if (img.channels == 1) {
        // single channel is the luma component
        for (double& v : out.pix) v += noise(rng);
    } else {
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                double Y, cb, cr;
                rgb_to_ycbcr(img.at(0, y, x), img.at(1, y, x), img.at(2, y, x), Y, cb, cr);
                Y += noise(rng);
                cb += noise(rng);
                cr += noise(rng);
                ycbcr_to_rgb(Y, cb, cr, out.at(0, y, x), out.at(1, y, x), out.at(2, y, x));
            }
    }
    out.clamp01();
    return out;
}

Image add_hf_noise(const Image& img, double variance, std::uint64_t seed) {
    if (!is_pow2(img.width) || !is_pow2(img.height))
        throw DataError("high-frequency noise needs power-of-two image dimensions, got " +
                        std::to_string(img.width) + "x" + std::to_string(img.height));
    auto rng = make_rng(seed);
    std::normal_distribution<double> noise(0.0, std::sqrt(variance));
    Image out = img;
    int w = img.width, h = img.height;
    std::vector<std::complex<double>> grid(static_cast<size_t>(w) * h);
    for (int c = 0; c < img.channels; ++c) {
        for (auto& g : grid) g = noise(rng);
        fft2(grid, w, h, false);
        // ideal radial high-pass: keep frequencies at or above half-Nyquist
        for (int y = 0; y < h; ++y) {
            double fy = static_cast<double>(std::min(y, h - y)) / h;
            for (int x = 0; x < w; ++x) {
                double fx = static_cast<double>(std::min(x, w - x)) / w;
                if (std::sqrt(fx * fx + fy * fy) < 0.25) grid[static_cast<size_t>(y) * w + x] = 0.0;
            }
        }
        fft2(grid, w, h, true);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) out.at(c, y, x) += grid[static_cast<size_t>(y) * w + x].real();
    }
    out.clamp01();
    return out;
}

Image impulse_noise(const Image& img, double density, std::uint64_t seed) {
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Image out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            if (unit(rng) >= density) continue;
            double v = unit(rng) < 0.5 ? 0.0 : 1.0;
            for (int c = 0; c < img.channels; ++c) out.at(c, y, x) = v;
        }
    return out;
}

Image quantize_step(const Image& img, double step01) {
    if (step01 <= 0) throw std::invalid_argument("quantization step must be positive");
    Image out = img;
    for (double& v : out.pix) v = std::floor(v / step01 + 0.5) * step01;
    out.clamp01();
    return out;
}

Image gaussian_blur(const Image& img, double sigma) {
    if (sigma <= 0) return img;
    int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double v = std::exp(-0.5 * (static_cast<double>(i) * i) / (sigma * sigma));
        kernel[static_cast<size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : kernel) v /= sum;

    Image mid(img.width, img.height, img.channels);
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    acc += kernel[static_cast<size_t>(i + radius)] *
                           img.at(c, y, std::clamp(x + i, 0, img.width - 1));
                mid.at(c, y, x) = acc;
            }
    Image out(img.width, img.height, img.channels);
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    acc += kernel[static_cast<size_t>(i + radius)] *
                           mid.at(c, std::clamp(y + i, 0, img.height - 1), x);
                out.at(c, y, x) = acc;
            }
    return out;
}

Image jpeg_compress(const Image& img, int quality) {
    if (quality < 1 || quality > 100) throw std::invalid_argument("compression quality must be in [1,100]");
    double scale = quality < 50 ? 5000.0 / quality : 200.0 - 2.0 * quality;
    double q[8][8];
    for (int i = 0; i < 64; ++i) {
        double v = std::floor((kJpegLumaBase[i] * scale + 50.0) / 100.0);
        q[i / 8][i % 8] = std::clamp(v, 1.0, 255.0);
    }

    // work on the luma plane; chroma is untouched by this proxy
    int w = img.width, h = img.height;
    std::vector<double> luma(static_cast<size_t>(w) * h);
    std::vector<double> cb, cr;
    if (img.channels == 1) {
        luma = img.pix;
    } else {
        cb.resize(luma.size());
        cr.resize(luma.size());
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                rgb_to_ycbcr(img.at(0, y, x), img.at(1, y, x), img.at(2, y, x),
                             luma[static_cast<size_t>(y) * w + x], cb[static_cast<size_t>(y) * w + x],
                             cr[static_cast<size_t>(y) * w + x]);
    }

    auto sample = [&](int y, int x) {
        return luma[static_cast<size_t>(std::min(y, h - 1)) * w + std::min(x, w - 1)] * 255.0 - 128.0;
    };
    double block[8][8], coef[8][8], recon[8][8];
    for (int by = 0; by < h; by += 8)
        for (int bx = 0; bx < w; bx += 8) {
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x) block[y][x] = sample(by + y, bx + x);
            dct8x8(block, coef, false);
            for (int v = 0; v < 8; ++v)
                for (int u = 0; u < 8; ++u) coef[v][u] = std::floor(coef[v][u] / q[v][u] + 0.5) * q[v][u];
            dct8x8(coef, recon, true);
            for (int y = 0; y < 8 && by + y < h; ++y)
                for (int x = 0; x < 8 && bx + x < w; ++x)
                    luma[static_cast<size_t>(by + y) * w + bx + x] = (recon[y][x] + 128.0) / 255.0;
        }

    Image out(w, h, img.channels);
    if (img.channels == 1) {
        out.pix = luma;
    } else {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                ycbcr_to_rgb(luma[static_cast<size_t>(y) * w + x], cb[static_cast<size_t>(y) * w + x],
                             cr[static_cast<size_t>(y) * w + x], out.at(0, y, x), out.at(1, y, x), out.at(2, y, x));
    }
    out.clamp01();
    return out;
}

Image displace_patches(const Image& img, int count, int patch, int max_offset, std::uint64_t seed) {
    auto rng = make_rng(seed);
    int pw = std::min(patch, img.width);
    int ph = std::min(patch, img.height);
    std::uniform_int_distribution<int> sx(0, img.width - pw);
    std::uniform_int_distribution<int> sy(0, img.height - ph);
    std::uniform_int_distribution<int> off(-max_offset, max_offset);
    Image out = img;
    std::vector<double> buf(static_cast<size_t>(pw) * ph);
    for (int n = 0; n < count; ++n) {
        int x0 = sx(rng), y0 = sy(rng);
        int x1 = std::clamp(x0 + off(rng), 0, img.width - pw);
        int y1 = std::clamp(y0 + off(rng), 0, img.height - ph);
        for (int c = 0; c < img.channels; ++c) {
            for (int y = 0; y < ph; ++y)
                for (int x = 0; x < pw; ++x) buf[static_cast<size_t>(y) * pw + x] = out.at(c, y0 + y, x0 + x);
            for (int y = 0; y < ph; ++y)
                for (int x = 0; x < pw; ++x) out.at(c, y1 + y, x1 + x) = buf[static_cast<size_t>(y) * pw + x];
        }
    }
    return out;
}

Image replace_blocks(const Image& img, int count, int block, std::uint64_t seed) {
    auto rng = make_rng(seed);
    int bw = std::min(block, img.width);
    int bh = std::min(block, img.height);
    std::uniform_int_distribution<int> sx(0, img.width - bw);
    std::uniform_int_distribution<int> sy(0, img.height - bh);
    std::uniform_real_distribution<double> color(0.0, 1.0);
    Image out = img;
    for (int n = 0; n < count; ++n) {
        int x0 = sx(rng), y0 = sy(rng);
        for (int c = 0; c < img.channels; ++c) {
            double v = color(rng);
            for (int y = 0; y < bh; ++y)
                for (int x = 0; x < bw; ++x) out.at(c, y0 + y, x0 + x) = v;
        }
    }
    return out;
}

Image mean_shift(const Image& img, double delta) {
    Image out = img;
    for (double& v : out.pix) v += delta;
    out.clamp01();
    return out;
}

Image contrast_change(const Image& img, double factor) {
    Image out = img;
    for (double& v : out.pix) v = 0.5 + factor * (v - 0.5);
    out.clamp01();
    return out;
}

Image adjust_saturation(const Image& img, double factor) {
    require_color(img, DistortionKind::saturation);
    Image out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double Y, cb, cr;
            rgb_to_ycbcr(img.at(0, y, x), img.at(1, y, x), img.at(2, y, x), Y, cb, cr);
            cb = 0.5 + factor * (cb - 0.5);
            cr = 0.5 + factor * (cr - 0.5);
            ycbcr_to_rgb(Y, cb, cr, out.at(0, y, x), out.at(1, y, x), out.at(2, y, x));
        }
    out.clamp01();
    return out;
}

Image multiplicative_noise(const Image& img, double variance, std::uint64_t seed) {
    auto rng = make_rng(seed);
    std::normal_distribution<double> noise(0.0, std::sqrt(variance));
    Image out = img;
    for (double& v : out.pix) v *= 1.0 + noise(rng);
    out.clamp01();
    return out;
}

Image color_quantize_dither(const Image& img, int levels) {
    if (levels < 2) throw std::invalid_argument("color quantization needs at least 2 levels");
    Image out = img;
    double steps = static_cast<double>(levels - 1);
    // Floyd-Steinberg error diffusion, independent per channel
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                double old = std::clamp(out.at(c, y, x), 0.0, 1.0);
                double nv = std::floor(old * steps + 0.5) / steps;
                out.at(c, y, x) = nv;
                double err = old - nv;
                if (x + 1 < img.width) out.at(c, y, x + 1) += err * 7.0 / 16.0;
                if (y + 1 < img.height) {
                    if (x > 0) out.at(c, y + 1, x - 1) += err * 3.0 / 16.0;
                    out.at(c, y + 1, x) += err * 5.0 / 16.0;
                    if (x + 1 < img.width) out.at(c, y + 1, x + 1) += err * 1.0 / 16.0;
                }
            }
    out.clamp01();
    return out;
}

Image chromatic_shift(const Image& img, int r_shift, int b_shift) {
    require_color(img, DistortionKind::chromatic_aberration);
    Image out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            out.at(0, y, x) = img.at(0, y, std::clamp(x - r_shift, 0, img.width - 1));
            out.at(2, y, x) = img.at(2, y, std::clamp(x + b_shift, 0, img.width - 1));
        }
    return out;
}

Image apply_distortion(const Image& img, const DistortionSpec& spec, std::uint64_t seed) {
    double p = distortion_parameter(spec);
    switch (spec.kind) {
        case DistortionKind::awgn: return add_awgn(img, p, seed);
        case DistortionKind::color_noise: return add_ycbcr_noise(img, p, seed);
        case DistortionKind::hf_noise: return add_hf_noise(img, p, seed);
        case DistortionKind::impulse: return impulse_noise(img, p, seed);
        case DistortionKind::quantization: return quantize_step(img, p / 255.0);
        case DistortionKind::gaussian_blur: return gaussian_blur(img, p);
        case DistortionKind::jpeg: return jpeg_compress(img, static_cast<int>(p));
        case DistortionKind::patch_displace: return displace_patches(img, static_cast<int>(p), 15, 20, seed);
        case DistortionKind::block_replace: return replace_blocks(img, static_cast<int>(p), 32, seed);
        case DistortionKind::mean_shift: return mean_shift(img, p / 255.0);
        case DistortionKind::contrast: return contrast_change(img, p);
        case DistortionKind::saturation: return adjust_saturation(img, p);
        case DistortionKind::mult_noise: return multiplicative_noise(img, p, seed);
        case DistortionKind::color_quant_dither: return color_quantize_dither(img, static_cast<int>(p));
        case DistortionKind::chromatic_aberration: {
            const std::vector<double>& b = kSchedChromaB;
            return chromatic_shift(img, static_cast<int>(p), static_cast<int>(b[static_cast<size_t>(spec.level) - 1]));
        }
    }
    unsupported(spec.kind);
}

RankedGroup build_distortion_group(const Image& img, DistortionKind kind, int levels, std::uint64_t seed) {
    if (levels < 2) throw ConfigError("a ranked distortion group needs at least 2 levels");
    if (levels > distortion_level_count(kind))
        throw ConfigError("schedule for " + distortion_name(kind) + " holds only " +
                          std::to_string(distortion_level_count(kind)) + " levels");
    int direction = +1;
    if (kind == DistortionKind::mean_shift || kind == DistortionKind::contrast)
        direction = (derive_seed(seed, "direction") & 1) ? +1 : -1;

    RankedGroup g;
    g.members.push_back(img);
    g.phi.push_back(0.0);
    for (int level = 1; level <= levels; ++level) {
        DistortionSpec spec{kind, level, direction};
        g.members.push_back(apply_distortion(img, spec, derive_seed(seed, "distort", static_cast<std::uint64_t>(level))));
        g.phi.push_back(-static_cast<double>(level));
    }
    return g;
}

long long comparable_pair_count(const RankedGroup& g) {
    long long n = 0;
    for (size_t i = 0; i < g.phi.size(); ++i)
        for (size_t j = i + 1; j < g.phi.size(); ++j)
            if (g.phi[i] != g.phi[j]) ++n;
    return n;
}

}  // namespace rankprox
