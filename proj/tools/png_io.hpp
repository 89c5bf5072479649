#pragma once

#include <stdexcept>
#include <string>

#include "detkit/tensor.hpp"

namespace detkit {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 8-bit RGB PNG <-> (H,W,3) float tensor in [0,1].
Tensor<float> read_png(const std::string& path);
void write_png(const std::string& path, const Tensor<float>& image);

}  // namespace detkit
