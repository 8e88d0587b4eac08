#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sigattn/attention.hpp"
#include "sigattn/mips.hpp"
#include "sigattn/numerics.hpp"
#include "sigattn/training.hpp"

namespace sigattn {

// Recorded attention-layer stand-in: keys/values plus an independent query set.
struct Trace {
    Matrix keys;
    Matrix values;
    Matrix queries;
    std::uint64_t seed = 0;  // generator metadata, not persisted
    double shift = 0.0;

    std::size_t n_keys() const { return keys.rows; }
    std::size_t n_queries() const { return queries.rows; }
    std::size_t d() const { return keys.cols; }
};

// keys/values ~ N(0, key_std^2 I); queries ~ N(shift*1, query_std^2 I);
// fully seed-determined.
Trace gen_data(std::size_t d, std::size_t n_keys, std::size_t n_queries, std::uint64_t seed,
               double shift = 0.5, double key_std = 1.0, double query_std = 1.0);

// File format: magic "HATR1" + version 0x01 + u32 n_keys, n_queries, d; then
// keys, values, queries as little-endian f64, row-major. Bit-exact round-trip.
void save_trace(const Trace& trace, const std::string& path);
Trace load_trace(const std::string& path);

struct EvalReport {
    std::string method;
    std::size_t bits = 0;
    std::size_t budget = 0;
    std::size_t sink = 0;
    std::size_t recent = 0;
    std::size_t true_k = 0;
    std::size_t n_queries = 0;
    double recall_mean = 0.0;
    double recall_std = 0.0;
    double attn_err_mean = 0.0;  // mean of ||sdpa - sparse_att(sel)|| / ||sdpa||
    double us_per_query = 0.0;   // selection + sparse attention wall time
};

using Selector = std::function<IndexSet(const Vector& q)>;

EvalReport run_eval(const AttentionInstance& inst, const Matrix& queries,
                    const Selector& select, const std::string& method, std::size_t bits,
                    std::size_t budget, std::size_t sink, std::size_t recent,
                    std::size_t true_k);

// CSV with a versioned header comment; identical bytes across runs except the
// us_per_query column.
std::string eval_csv(const std::vector<EvalReport>& reports);

struct BenchRow {
    std::size_t n_tokens = 0;
    double ip_us = 0.0;                // full d-dim inner products over all tokens
    std::vector<double> hamming_us;    // one entry per requested bit width
};

struct BenchReport {
    std::size_t d = 0;
    std::vector<std::size_t> bit_widths;
    std::vector<BenchRow> rows;
};

// Median of 9 repetitions after 2 warmups, monotonic clock, single thread.
BenchReport bench_latency(const std::vector<std::size_t>& n_tokens,
                          const std::vector<std::size_t>& bit_widths, std::size_t d);

std::string bench_csv(const BenchReport& report);

} // namespace sigattn
