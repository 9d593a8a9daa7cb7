#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "splitconv/tensor.hpp"

namespace splitconv {

// Trusted low-rank part of an activation, stored as rank-many (u, v) vector
// pairs: reconstruction is sum_i u_i * v_i^T reshaped to channels x H x W.
// u_i has one coefficient per channel, v_i one value per spatial position.
struct FactoredActivation {
    std::size_t rank = 0;
    std::vector<std::vector<double>> u; // rank vectors, length = channels
    std::vector<std::vector<double>> v; // rank vectors, length = H*W
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;

    std::size_t spatial() const { return height * width; }
    std::size_t stored_values() const { return rank * (channels + spatial()); }
};

// Channel spectrum of a flattened activation: singular values descending,
// their normalized counterparts, the SVD-channel entropy in bits, and the
// principal-channel count ceil(2^mu).
struct SpectralProfile {
    std::vector<double> singular_values;
    std::vector<double> normalized;
    double entropy_bits = 0.0;
    std::size_t principal_count = 1;
};

// Eigenvalues of a symmetric n x n matrix (row-major), descending, via
// cyclic Jacobi rotations. Sweeps stop once the off-diagonal Frobenius norm
// falls below tol_rel times the matrix Frobenius norm.
std::vector<double> symmetric_eigenvalues(std::vector<double> a, std::size_t n,
                                          double tol_rel = 1e-12);

// Exact channel spectrum of a 2-d matrix (channels x HW) through the
// channels x channels Gram matrix. s_j = sqrt(lambda_j).
SpectralProfile channel_spectrum(const Tensor& xf);

struct LightSvdResult {
    FactoredActivation factors;
    Tensor residual;        // same shape as the input matrix
    std::size_t mac_count;  // counted multiply-adds
};

// Alternating-optimization rank-r factorization without orthogonality:
//   u = X.v / |v|^2,  v = X^T.u / |u|^2   (max_iter times per component),
// then deflate X by u v^T. The invariant reconstruct(factors) + residual
// = input holds for every r and max_iter. A zero-norm iterate terminates
// its component with u = 0 and leaves the residual unchanged.
LightSvdResult light_svd(const Tensor& xf, std::size_t r,
                         const std::vector<std::vector<double>>* init_v = nullptr,
                         std::size_t max_iter = 2);

// sum_i u_i v_i^T reshaped to channels x H x W
Tensor reconstruct(const FactoredActivation& f);
// same sum kept as a channels x HW matrix
Tensor reconstruct_matrix(const FactoredActivation& f);

struct DecomposeResult {
    FactoredActivation trusted;
    Tensor untrusted;       // residual, channels x H x W
    std::size_t mac_count;
    std::string warning;    // non-empty when r was clamped to the channel count
};

// flatten -> light_svd -> reshape residual. warm_start v vectors seed the
// iteration when their length matches this activation's spatial size.
DecomposeResult decompose_activation(const Tensor& x, std::size_t r,
                                     const FactoredActivation* warm_start = nullptr,
                                     std::size_t max_iter = 2);

} // namespace splitconv
