#include "sigattn/signature.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sigattn {

namespace {

constexpr char kCacheMagic[5] = {'H', 'A', 'S', 'G', '1'};
constexpr std::uint8_t kCacheVersion = 0x01;

void write_u32le(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32le(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u64le(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64le(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

} // namespace

MappingNetwork make_network(const std::vector<std::size_t>& dims, Rng& rng) {
    if (dims.size() < 2) throw std::invalid_argument("make_network: need at least two dims");
    MappingNetwork net;
    net.layer_dims = dims;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t fan_in = dims[l];
        const std::size_t fan_out = dims[l + 1];
        const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
        net.weights.push_back(gaussian(rng, fan_out, fan_in, 0.0, std));
        net.biases.emplace_back(fan_out, 0.0);
    }
    return net;
}

Vector forward_real(const MappingNetwork& net, const Vector& x) {
    if (x.size() != net.in_dim())
        throw std::invalid_argument("forward_real: input dimension mismatch");
    Vector h = x;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        const Matrix& w = net.weights[l];
        const Vector& b = net.biases[l];
        Vector next(w.rows);
        for (std::size_t o = 0; o < w.rows; ++o)
            next[o] = dot(w.row(o), h.data(), w.cols) + b[o];
        const bool hidden = l + 1 < net.weights.size();
        if (hidden)
            for (double& v : next)
                if (v < 0.0) v = 0.0;
        h = std::move(next);
    }
    return h;
}

Signature pack_bits(const std::vector<std::uint8_t>& bits) {
    Signature sig;
    sig.bits = bits.size();
    sig.words.assign((bits.size() + 63) / 64, 0);
    for (std::size_t j = 0; j < bits.size(); ++j)
        if (bits[j]) sig.words[j / 64] |= (std::uint64_t{1} << (j % 64));
    return sig;
}

std::vector<std::uint8_t> unpack_bits(const Signature& sig) {
    std::vector<std::uint8_t> bits(sig.bits);
    for (std::size_t j = 0; j < sig.bits; ++j)
        bits[j] = static_cast<std::uint8_t>((sig.words[j / 64] >> (j % 64)) & 1u);
    return bits;
}

std::size_t hamming(const Signature& a, const Signature& b) {
    if (a.bits != b.bits) throw std::invalid_argument("hamming: bit-width mismatch");
    std::size_t h = 0;
    for (std::size_t w = 0; w < a.words.size(); ++w)
        h += static_cast<std::size_t>(std::popcount(a.words[w] ^ b.words[w]));
    return h;
}

Signature phi_bits(const MappingNetwork& net, const Vector& x) {
    const Vector f = forward_real(net, x);
    std::vector<std::uint8_t> bits(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) bits[j] = f[j] > 0.0 ? 1 : 0;
    return pack_bits(bits);
}

Signature SignatureCache::get(std::size_t i) const {
    Signature sig;
    sig.bits = bits;
    sig.words.assign(words.begin() + static_cast<std::ptrdiff_t>(i * words_per_sig),
                     words.begin() + static_cast<std::ptrdiff_t>((i + 1) * words_per_sig));
    return sig;
}

Vector hash_score(const SignatureCache& cache, const Signature& q_sig) {
    if (cache.bits != q_sig.bits) throw std::invalid_argument("hash_score: bit-width mismatch");
    Vector out(cache.n);
    const std::uint64_t* base = cache.words.data();
    for (std::size_t i = 0; i < cache.n; ++i) {
        const std::uint64_t* row = base + i * cache.words_per_sig;
        std::size_t h = 0;
        for (std::size_t w = 0; w < cache.words_per_sig; ++w)
            h += static_cast<std::size_t>(std::popcount(row[w] ^ q_sig.words[w]));
        out[i] = -static_cast<double>(h);
    }
    return out;
}

SignatureCache build_cache(const MappingNetwork& net_kv, const Matrix& keys) {
    if (keys.rows > 0 && keys.cols != net_kv.in_dim())
        throw std::invalid_argument("build_cache: key dimension mismatch");
    SignatureCache cache;
    cache.n = keys.rows;
    cache.bits = net_kv.out_bits();
    cache.words_per_sig = (cache.bits + 63) / 64;
    cache.words.reserve(cache.n * cache.words_per_sig);
    Vector x(keys.cols);
    for (std::size_t i = 0; i < keys.rows; ++i) {
        x.assign(keys.row(i), keys.row(i) + keys.cols);
        const Signature sig = phi_bits(net_kv, x);
        cache.words.insert(cache.words.end(), sig.words.begin(), sig.words.end());
    }
    return cache;
}

IndexSet select_pivotal(const SignatureCache& cache, const MappingNetwork& net_q,
                        const Vector& q, std::size_t budget, std::size_t sink,
                        std::size_t recent) {
    if (budget < 1) throw std::invalid_argument("select_pivotal: budget must be >= 1");
    const Vector scores = hash_score(cache, phi_bits(net_q, q));
    return forced_union(topk(scores, budget), cache.n, sink, recent);
}

void save_cache(const SignatureCache& cache, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_cache: cannot open " + path);
    os.write(kCacheMagic, 5);
    os.put(static_cast<char>(kCacheVersion));
    write_u32le(os, static_cast<std::uint32_t>(cache.n));
    write_u32le(os, static_cast<std::uint32_t>(cache.bits));
    for (std::uint64_t w : cache.words) write_u64le(os, w);
    if (!os) throw std::runtime_error("save_cache: write failed for " + path);
}

SignatureCache load_cache(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_cache: cannot open " + path);
    char magic[5];
    is.read(magic, 5);
    if (!is || std::memcmp(magic, kCacheMagic, 5) != 0)
        throw std::runtime_error("load_cache: bad magic in " + path);
    const int version = is.get();
    if (version != kCacheVersion) throw std::runtime_error("load_cache: unsupported version");
    SignatureCache cache;
    cache.n = read_u32le(is);
    cache.bits = read_u32le(is);
    cache.words_per_sig = (cache.bits + 63) / 64;
    cache.words.resize(cache.n * cache.words_per_sig);
    for (std::uint64_t& w : cache.words) w = read_u64le(is);
    if (!is) throw std::runtime_error("load_cache: truncated file " + path);
    return cache;
}

} // namespace sigattn
