#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace tokred {

// Dense row-major float matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0f) {}

    float* row(std::size_t i) { return data.data() + i * cols; }
    const float* row(std::size_t i) const { return data.data() + i * cols; }
    float& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    float at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    bool operator==(const Matrix&) const = default;
};

// Rank-3 tensor, contiguous, last dimension fastest. Used for per-head
// attention probabilities (H x N x N) and per-head keys (H x N x d/H).
struct Tensor3 {
    std::size_t d0 = 0, d1 = 0, d2 = 0;
    std::vector<float> data;

    Tensor3() = default;
    Tensor3(std::size_t a, std::size_t b, std::size_t c)
        : d0(a), d1(b), d2(c), data(a * b * c, 0.0f) {}

    float* row(std::size_t i, std::size_t j) { return data.data() + (i * d1 + j) * d2; }
    const float* row(std::size_t i, std::size_t j) const {
        return data.data() + (i * d1 + j) * d2;
    }
    float at(std::size_t i, std::size_t j, std::size_t k) const {
        return data[(i * d1 + j) * d2 + k];
    }
    float& at(std::size_t i, std::size_t j, std::size_t k) {
        return data[(i * d1 + j) * d2 + k];
    }
};

// out = a * b, a is m x k, b is k x n. Row-blocked so a small strip of out
// stays cache-hot while each row of b streams through once per strip.
void matmul(const Matrix& a, const Matrix& b, Matrix& out);

float dot(const float* x, const float* y, std::size_t n);

// One row of pre-norm layer normalization (eps 1e-5): y = (y - mean)/std * scale + shift.
void layer_norm_row(float* y, std::size_t n, const float* scale, const float* shift);

// Numerically shifted softmax over one row. Entries at -inf come out as exact zeros.
void softmax_row(float* y, std::size_t n);

// Exact GELU, 0.5 x (1 + erf(x / sqrt(2))).
float gelu(float x);

// SplitMix64 step; stable seed mixer for deriving per-layer / per-batch streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

// Uniform in [0,1) from the top 53 bits of a 64-bit draw. Used instead of
// std::uniform_real_distribution, whose mapping is implementation-defined.
double u53(std::uint64_t bits);

}  // namespace tokred
