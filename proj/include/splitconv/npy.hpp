#pragma once

#include <string>

#include "splitconv/tensor.hpp"

namespace splitconv {

// .npy version 1.0, little-endian. save_array writes "<f8" row-major;
// load_array accepts "<f8" and "<f4" (widened exactly to double) and rejects
// anything else naming the dtype. Round-trips are lossless for "<f8".
Tensor load_array(const std::string& path);
void save_array(const std::string& path, const Tensor& t);

} // namespace splitconv
