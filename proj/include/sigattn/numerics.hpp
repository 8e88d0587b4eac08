#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace sigattn {

// Dense row-major matrix of 64-bit floats. The one canonical layout used
// everywhere; rows(), cols() and a flat data vector.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }

    bool operator==(const Matrix& o) const {
        return rows == o.rows && cols == o.cols && data == o.data;
    }
};

using Vector = std::vector<double>;

// splitmix64: 64-bit counter with an xorshift-multiply finalizer. Identical
// streams on every platform for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; generates pairs and caches the second.
    double next_gaussian();

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

double dot(const double* a, const double* b, std::size_t n);
double l2_norm(const double* x, std::size_t n);
double l2_norm(const Vector& x);

// Standard product, 64-bit accumulation, k-ascending addition order per entry
// (bitwise identical to the naive triple loop).
Matrix matmul(const Matrix& a, const Matrix& b);
// a (m x k) times b^T where b is (n x k); contiguous-row dot products.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// a^T (k x m) times b (m x n) -> (k x n); row-accumulation order over m.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

// Max-subtracted stable softmax; output sums to 1 within 1e-12.
Vector softmax(const Vector& x);

// rows x cols of i.i.d. N(mean, std^2), filled row-major in stream order.
Matrix gaussian(Rng& rng, std::size_t rows, std::size_t cols, double mean, double std);

} // namespace sigattn
