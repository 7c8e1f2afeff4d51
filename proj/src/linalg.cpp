#include "tokred/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tokred {

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
    const std::size_t m = a.rows;
    const std::size_t kdim = a.cols;
    const std::size_t n = b.cols;
    out.rows = m;
    out.cols = n;
    out.data.assign(m * n, 0.0f);

    constexpr std::size_t row_block = 8;
    for (std::size_t i0 = 0; i0 < m; i0 += row_block) {
        const std::size_t i1 = std::min(i0 + row_block, m);
        for (std::size_t k = 0; k < kdim; ++k) {
            const float* brow = b.row(k);
            for (std::size_t i = i0; i < i1; ++i) {
                const float aik = a.at(i, k);
                float* crow = out.row(i);
                for (std::size_t j = 0; j < n; ++j) {
                    crow[j] += aik * brow[j];
                }
            }
        }
    }
}

float dot(const float* x, const float* y, std::size_t n) {
    float acc0 = 0.0f, acc1 = 0.0f, acc2 = 0.0f, acc3 = 0.0f;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 += x[i] * y[i];
        acc1 += x[i + 1] * y[i + 1];
        acc2 += x[i + 2] * y[i + 2];
        acc3 += x[i + 3] * y[i + 3];
    }
    for (; i < n; ++i) {
        acc0 += x[i] * y[i];
    }
    return (acc0 + acc1) + (acc2 + acc3);
}

void layer_norm_row(float* y, std::size_t n, const float* scale, const float* shift) {
    constexpr float eps = 1e-5f;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean += y[i];
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = y[i] - mean;
        var += c * c;
    }
    var /= static_cast<double>(n);
    const float inv = 1.0f / std::sqrt(static_cast<float>(var) + eps);
    const float m = static_cast<float>(mean);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = (y[i] - m) * inv * scale[i] + shift[i];
    }
}

void softmax_row(float* y, std::size_t n) {
    float mx = -std::numeric_limits<float>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        mx = std::max(mx, y[i]);
    }
    float sum = 0.0f;
    for (std::size_t i = 0; i < n; ++i) {
        // exp(-inf - mx) underflows to exactly 0, which keeps masked keys at
        // zero probability without a separate pass.
        y[i] = std::exp(y[i] - mx);
        sum += y[i];
    }
    const float inv = 1.0f / sum;
    for (std::size_t i = 0; i < n; ++i) {
        y[i] *= inv;
    }
}

float gelu(float x) {
    return 0.5f * x * (1.0f + std::erf(x * 0.70710678118654752440f));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double u53(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace tokred
