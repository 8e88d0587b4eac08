#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sigattn/attention.hpp"
#include "sigattn/numerics.hpp"

namespace sigattn {

// Feed-forward network F with ReLU hidden layers and a raw (pre-sign) output
// layer of out_bits units. weights[l] is (dims[l+1] x dims[l]), row per
// output neuron.
struct MappingNetwork {
    std::vector<std::size_t> layer_dims;
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    std::size_t in_dim() const { return layer_dims.front(); }
    std::size_t out_bits() const { return layer_dims.back(); }
};

// He initialization: weights ~ N(0, 2/fan_in), biases 0.
MappingNetwork make_network(const std::vector<std::size_t>& dims, Rng& rng);

// Raw pre-sign outputs F(x).
Vector forward_real(const MappingNetwork& net, const Vector& x);

// b bits packed LSB-first into 64-bit words; bits past b in the last word are 0.
struct Signature {
    std::size_t bits = 0;
    std::vector<std::uint64_t> words;

    bool operator==(const Signature& o) const { return bits == o.bits && words == o.words; }
};

Signature pack_bits(const std::vector<std::uint8_t>& bits);
std::vector<std::uint8_t> unpack_bits(const Signature& sig);

// Count of differing bits; sum of per-word popcounts of the xor.
std::size_t hamming(const Signature& a, const Signature& b);

// bit j = 1 iff F(x)_j > 0 (sign(0) maps to bit 0).
Signature phi_bits(const MappingNetwork& net, const Vector& x);

// n packed signatures of equal width, stored contiguously.
struct SignatureCache {
    std::size_t n = 0;
    std::size_t bits = 0;
    std::size_t words_per_sig = 0;
    std::vector<std::uint64_t> words;

    Signature get(std::size_t i) const;
};

// score_i = -hamming(cache[i], q_sig); higher is better.
Vector hash_score(const SignatureCache& cache, const Signature& q_sig);

// Row-wise phi_bits over keys.
SignatureCache build_cache(const MappingNetwork& net_kv, const Matrix& keys);

// forced_union(topk(hash_score(cache, phi_bits(net_q, q)), budget), n, sink, recent).
IndexSet select_pivotal(const SignatureCache& cache, const MappingNetwork& net_q,
                        const Vector& q, std::size_t budget, std::size_t sink,
                        std::size_t recent);

// File format: magic "HASG1" + version 0x01 + u32 n + u32 bits +
// n * ceil(bits/64) little-endian u64 words. Bit-exact round-trip.
void save_cache(const SignatureCache& cache, const std::string& path);
SignatureCache load_cache(const std::string& path);

} // namespace sigattn
