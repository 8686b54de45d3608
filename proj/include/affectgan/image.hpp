#pragma once

#include <filesystem>
#include <vector>

namespace affectgan {

// Planar RGB image, values in [0,1], channel-major (CHW).
struct Image {
    static constexpr int channels = 3;

    int height = 0;
    int width = 0;
    std::vector<double> data;

    Image() = default;
    Image(int h, int w) : height(h), width(w), data(static_cast<std::size_t>(3) * h * w, 0.0) {}

    double& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    double at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    std::size_t size() const { return data.size(); }
    bool same_shape(const Image& o) const { return height == o.height && width == o.width; }
};

// 8-bit RGB PNG round trip. Reading promotes gray/palette/alpha to RGB.
Image read_png(const std::filesystem::path& file);
void write_png(const Image& image, const std::filesystem::path& file);

Image gaussian_blur(const Image& image, double sigma);

// Box-average by `factor`, then nearest-neighbour upsample to original size.
Image downsample_upsample(const Image& image, int factor);

double image_mse(const Image& a, const Image& b);
double psnr(const Image& a, const Image& b);  // peak = 1.0

}  // namespace affectgan
