#include "rankprox/image.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rankprox/errors.hpp"

namespace rankprox {

Image::Image(int w, int h, int c, double fill) : width(w), height(h), channels(c) {
    if (w <= 0 || h <= 0 || (c != 1 && c != 3))
        throw std::invalid_argument("image needs positive dimensions and 1 or 3 channels");
    pix.assign(static_cast<size_t>(w) * h * c, fill);
}

void Image::clamp01() {
    for (double& v : pix) v = std::clamp(v, 0.0, 1.0);
}

Tensor to_tensor(const Image& img) { return Tensor({img.channels, img.height, img.width}, img.pix); }

Image from_tensor(const Tensor& t) {
    if (t.rank() != 3) throw std::invalid_argument("image tensor must be [C,H,W], got " + Tensor::shape_str(t.shape()));
    Image img(t.dim(2), t.dim(1), t.dim(0));
    img.pix = t.values();
    return img;
}

double bilinear_sample(const Image& img, int c, double x, double y) {
    double fx = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
    double fy = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
    int x0 = static_cast<int>(std::floor(fx));
    int y0 = static_cast<int>(std::floor(fy));
    int x1 = std::min(x0 + 1, img.width - 1);
    int y1 = std::min(y0 + 1, img.height - 1);
    double ax = fx - x0;
    double ay = fy - y0;
    double top = img.at(c, y0, x0) * (1 - ax) + img.at(c, y0, x1) * ax;
    double bot = img.at(c, y1, x0) * (1 - ax) + img.at(c, y1, x1) * ax;
    return top * (1 - ay) + bot * ay;
}

Image resize_bilinear(const Image& img, int out_w, int out_h) {
    Image out(out_w, out_h, img.channels);
    double sx = static_cast<double>(img.width) / out_w;
    double sy = static_cast<double>(img.height) / out_h;
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < out_h; ++y)
            for (int x = 0; x < out_w; ++x)
                out.at(c, y, x) = bilinear_sample(img, c, (x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5);
    return out;
}

Image crop_resize(const Image& img, double cx, double cy, double side, int out_size) {
    if (side <= 0 || out_size <= 0) throw std::invalid_argument("crop window and output size must be positive");
    Image out(out_size, out_size, img.channels);
    double left = cx - side / 2.0;
    double top = cy - side / 2.0;
    double step = side / out_size;
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < out_size; ++y)
            for (int x = 0; x < out_size; ++x)
                out.at(c, y, x) =
                    bilinear_sample(img, c, left + (x + 0.5) * step - 0.5, top + (y + 0.5) * step - 0.5);
    return out;
}

void rgb_to_ycbcr(double r, double g, double b, double& y, double& cb, double& cr) {
    y = 0.299 * r + 0.587 * g + 0.114 * b;
    cb = 0.5 + (b - y) / 1.772;
    cr = 0.5 + (r - y) / 1.402;
}

void ycbcr_to_rgb(double y, double cb, double cr, double& r, double& g, double& b) {
    r = y + 1.402 * (cr - 0.5);
    b = y + 1.772 * (cb - 0.5);
    g = (y - 0.299 * r - 0.114 * b) / 0.587;
}

namespace {

unsigned char quantize8(double v) {
    double s = std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5);
    return static_cast<unsigned char>(std::clamp(s, 0.0, 255.0));
}

// PNM headers are whitespace/comment delimited ASCII tokens.
int read_pnm_token(std::istream& in, const std::string& path) {
    int c = in.get();
    while (c != EOF && (std::isspace(c) || c == '#')) {
        if (c == '#')
            while (c != EOF && c != '\n') c = in.get();
        c = in.get();
    }
    std::string tok;
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    try {
        size_t pos = 0;
        int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw DataError("malformed PNM header in " + path);
    }
}

}  // namespace

void save_image(const std::string& path, const Image& img) {
    std::ostringstream buf;
    buf << (img.channels == 1 ? "P5" : "P6") << "\n" << img.width << " " << img.height << "\n255\n";
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) buf.put(static_cast<char>(quantize8(img.at(c, y, x))));
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write image: " + path);
        const std::string& s = buf.str();
        out.write(s.data(), static_cast<std::streamsize>(s.size()));
        if (!out) throw DataError("short write on image: " + path);
    }
    std::filesystem::rename(tmp, path);
}

Image load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open image: " + path);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    int channels;
    if (magic[0] == 'P' && magic[1] == '5')
        channels = 1;
    else if (magic[0] == 'P' && magic[1] == '6')
        channels = 3;
    else
        throw DataError("unsupported image format in " + path + " (expected binary PGM/PPM)");
    int w = read_pnm_token(in, path);
    int h = read_pnm_token(in, path);
    int maxval = read_pnm_token(in, path);
    if (w <= 0 || h <= 0 || maxval != 255) throw DataError("unsupported PNM geometry in " + path);

    std::vector<char> raw(static_cast<size_t>(w) * h * channels);
    in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw DataError("truncated image data in " + path);

    Image img(w, h, channels);
    size_t k = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < channels; ++c)
                img.at(c, y, x) = static_cast<unsigned char>(raw[k++]) / 255.0;
    return img;
}

}  // namespace rankprox
