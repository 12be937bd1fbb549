#pragma once

#include <string>
#include <vector>

#include "rankprox/tensor.hpp"

namespace rankprox {

// Planar image: channel-major [C][H][W] doubles in [0,1], matching the
// network's input tensor layout. Channel order for color images is R, G, B.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<double> pix;

    Image() = default;
    Image(int w, int h, int c, double fill = 0.0);

    double& at(int c, int y, int x) { return pix[(static_cast<size_t>(c) * height + y) * width + x]; }
    double at(int c, int y, int x) const { return pix[(static_cast<size_t>(c) * height + y) * width + x]; }

    void clamp01();
};

Tensor to_tensor(const Image& img);         // [C,H,W]
Image from_tensor(const Tensor& t);          // expects rank-3 [C,H,W]

// Bilinear sample at pixel-index coordinates (x, y), edges clamped.
double bilinear_sample(const Image& img, int c, double x, double y);

Image resize_bilinear(const Image& img, int out_w, int out_h);

// Resample the axis-aligned square window centered at (cx, cy) with the given
// side length (continuous image coordinates) to an out_size x out_size image.
Image crop_resize(const Image& img, double cx, double cy, double side, int out_size);

// Broadcast-TV luma/chroma transform on [0,1] values; Cb/Cr are offset to 0.5.
void rgb_to_ycbcr(double r, double g, double b, double& y, double& cb, double& cr);
void ycbcr_to_rgb(double y, double cb, double cr, double& r, double& g, double& b);

// 8-bit binary PGM (P5, 1 channel) / PPM (P6, 3 channels); values scaled by
// 255 with round-half-up on write. save_image picks the format from the
// channel count; load_image from the magic bytes.
void save_image(const std::string& path, const Image& img);
Image load_image(const std::string& path);

}  // namespace rankprox
