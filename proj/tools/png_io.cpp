#include "png_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <vector>

#include <png.h>

namespace detkit {

Tensor<float> read_png(const std::string& path) {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.c_str()))
        throw IoError("cannot read PNG " + path + ": " + img.message);
    img.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
        const std::string msg = img.message;
        png_image_free(&img);
        throw IoError("cannot decode PNG " + path + ": " + msg);
    }
    Tensor<float> out({static_cast<int>(img.height), static_cast<int>(img.width), 3});
    for (std::size_t i = 0; i < buf.size(); ++i) out.data[i] = buf[i] / 255.0f;
    return out;
}

void write_png(const std::string& path, const Tensor<float>& image) {
    if (image.rank() != 3 || image.shape[2] != 3)
        throw IoError("write_png: expected (H,W,3) image, got " + shape_str(image));
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.shape[1]);
    img.height = static_cast<png_uint_32>(image.shape[0]);
    img.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> buf(image.numel());
    for (std::size_t i = 0; i < buf.size(); ++i) {
        const float v = std::clamp(image.data[i], 0.0f, 1.0f);
        buf[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
    }
    if (!png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr))
        throw IoError("cannot write PNG " + path + ": " + img.message);
}

}  // namespace detkit
