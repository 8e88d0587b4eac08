#include "sigattn/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sigattn {

namespace {

constexpr char kTraceMagic[5] = {'H', 'A', 'T', 'R', '1'};
constexpr std::uint8_t kTraceVersion = 0x01;

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

void write_f64le(std::ostream& os, double d) {
    const std::uint64_t v = std::bit_cast<std::uint64_t>(d);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64le(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(v);
}

void write_matrix(std::ostream& os, const Matrix& m) {
    for (double d : m.data) write_f64le(os, d);
}

Matrix read_matrix(std::istream& is, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& d : m.data) d = read_f64le(is);
    return m;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_time(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

using Clock = std::chrono::steady_clock;

// Median of 9 timed repetitions after 2 warmups; the kernel's checksum is
// accumulated into a volatile sink so the work cannot be optimized away.
volatile double g_bench_sink = 0.0;

template <typename F>
double median_us(F&& kernel) {
    for (int i = 0; i < 2; ++i) g_bench_sink = g_bench_sink + kernel();
    std::vector<double> times(9);
    for (double& t : times) {
        const auto t0 = Clock::now();
        g_bench_sink = g_bench_sink + kernel();
        const auto t1 = Clock::now();
        t = std::chrono::duration<double, std::micro>(t1 - t0).count();
    }
    std::sort(times.begin(), times.end());
    return times[4];
}

} // namespace

Trace gen_data(std::size_t d, std::size_t n_keys, std::size_t n_queries, std::uint64_t seed,
               double shift, double key_std, double query_std) {
    if (d == 0 || n_keys == 0 || n_queries == 0)
        throw std::invalid_argument("gen_data: empty dimensions");
    if (key_std < 0.0 || query_std < 0.0)
        throw std::invalid_argument("gen_data: negative std");
    Rng rng(seed);
    Trace t;
    t.keys = gaussian(rng, n_keys, d, 0.0, key_std);
    t.values = gaussian(rng, n_keys, d, 0.0, key_std);
    t.queries = gaussian(rng, n_queries, d, shift, query_std);
    t.seed = seed;
    t.shift = shift;
    return t;
}

void save_trace(const Trace& trace, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_trace: cannot open " + path);
    os.write(kTraceMagic, 5);
    os.put(static_cast<char>(kTraceVersion));
    write_u32le(os, static_cast<std::uint32_t>(trace.n_keys()));
    write_u32le(os, static_cast<std::uint32_t>(trace.n_queries()));
    write_u32le(os, static_cast<std::uint32_t>(trace.d()));
    write_matrix(os, trace.keys);
    write_matrix(os, trace.values);
    write_matrix(os, trace.queries);
    if (!os) throw std::runtime_error("save_trace: write failed for " + path);
}

Trace load_trace(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_trace: cannot open " + path);
    char magic[5];
    is.read(magic, 5);
    if (!is || std::memcmp(magic, kTraceMagic, 5) != 0)
        throw std::runtime_error("load_trace: bad magic in " + path);
    if (is.get() != kTraceVersion) throw std::runtime_error("load_trace: unsupported version");
    const std::size_t n_keys = read_u32le(is);
    const std::size_t n_queries = read_u32le(is);
    const std::size_t d = read_u32le(is);
    Trace t;
    t.keys = read_matrix(is, n_keys, d);
    t.values = read_matrix(is, n_keys, d);
    t.queries = read_matrix(is, n_queries, d);
    if (!is) throw std::runtime_error("load_trace: truncated file " + path);
    return t;
}

EvalReport run_eval(const AttentionInstance& inst, const Matrix& queries,
                    const Selector& select, const std::string& method, std::size_t bits,
                    std::size_t budget, std::size_t sink, std::size_t recent,
                    std::size_t true_k) {
    if (budget > inst.n()) throw std::invalid_argument("run_eval: budget > n");
    if (true_k > inst.n()) throw std::invalid_argument("run_eval: true_k > n");
    if (queries.cols != inst.d()) throw std::invalid_argument("run_eval: query dim mismatch");

    EvalReport rep;
    rep.method = method;
    rep.bits = bits;
    rep.budget = budget;
    rep.sink = sink;
    rep.recent = recent;
    rep.true_k = true_k;
    rep.n_queries = queries.rows;

    double rsum = 0.0, rsq = 0.0, esum = 0.0, tsum = 0.0;
    Vector q(inst.d());
    for (std::size_t r = 0; r < queries.rows; ++r) {
        q.assign(queries.row(r), queries.row(r) + queries.cols);
        const IndexSet truth = topk(oracle_score(inst, q), true_k);
        const Vector full = sdpa(inst, q);

        const auto t0 = Clock::now();
        const IndexSet sel = select(q);
        const Vector approx = sparse_att(inst, q, sel);
        const auto t1 = Clock::now();
        tsum += std::chrono::duration<double, std::micro>(t1 - t0).count();

        const double rec = recall(sel, truth);
        rsum += rec;
        rsq += rec * rec;
        double err2 = 0.0, ref2 = 0.0;
        for (std::size_t c = 0; c < inst.d(); ++c) {
            const double diff = full[c] - approx[c];
            err2 += diff * diff;
            ref2 += full[c] * full[c];
        }
        esum += ref2 > 0.0 ? std::sqrt(err2 / ref2) : std::sqrt(err2);
    }
    const double invm = 1.0 / static_cast<double>(queries.rows);
    rep.recall_mean = rsum * invm;
    const double var = std::max(0.0, rsq * invm - rep.recall_mean * rep.recall_mean);
    rep.recall_std = std::sqrt(var);
    rep.attn_err_mean = esum * invm;
    rep.us_per_query = tsum * invm;
    return rep;
}

std::string eval_csv(const std::vector<EvalReport>& reports) {
    std::string out = "# sigattn eval report v1\n";
    out += "method,bits,budget,sink,recent,true_k,n_queries,recall_mean,recall_std,"
           "attn_err_mean,us_per_query\n";
    for (const EvalReport& r : reports) {
        out += r.method + ',' + std::to_string(r.bits) + ',' + std::to_string(r.budget) + ',' +
               std::to_string(r.sink) + ',' + std::to_string(r.recent) + ',' +
               std::to_string(r.true_k) + ',' + std::to_string(r.n_queries) + ',' +
               fmt_double(r.recall_mean) + ',' + fmt_double(r.recall_std) + ',' +
               fmt_double(r.attn_err_mean) + ',' + fmt_time(r.us_per_query) + '\n';
    }
    return out;
}

BenchReport bench_latency(const std::vector<std::size_t>& n_tokens,
                          const std::vector<std::size_t>& bit_widths, std::size_t d) {
    for (std::size_t n : n_tokens)
        if (n < 1) throw std::invalid_argument("bench_latency: n_tokens must be >= 1");
    for (std::size_t b : bit_widths)
        if (b < 1) throw std::invalid_argument("bench_latency: bit widths must be >= 1");
    if (d < 1) throw std::invalid_argument("bench_latency: d must be >= 1");

    BenchReport report;
    report.d = d;
    report.bit_widths = bit_widths;
    Rng rng(0x5ca1ab1eull);

    for (std::size_t n : n_tokens) {
        BenchRow row;
        row.n_tokens = n;

        std::vector<double> keys(n * d);
        for (double& v : keys) v = rng.next_gaussian();
        std::vector<double> query(d);
        for (double& v : query) v = rng.next_gaussian();
        row.ip_us = median_us([&] {
            double s = 0.0;
            const double* qp = query.data();
            for (std::size_t i = 0; i < n; ++i) s += dot(qp, keys.data() + i * d, d);
            return s;
        });

        for (std::size_t b : bit_widths) {
            const std::size_t words = (b + 63) / 64;
            std::vector<std::uint64_t> sigs(n * words);
            for (std::uint64_t& w : sigs) w = rng.next_u64();
            std::vector<std::uint64_t> qsig(words);
            for (std::uint64_t& w : qsig) w = rng.next_u64();
            row.hamming_us.push_back(median_us([&] {
                std::size_t h = 0;
                const std::uint64_t* qp = qsig.data();
                for (std::size_t i = 0; i < n; ++i) {
                    const std::uint64_t* sp = sigs.data() + i * words;
                    for (std::size_t w = 0; w < words; ++w)
                        h += static_cast<std::size_t>(std::popcount(sp[w] ^ qp[w]));
                }
                return static_cast<double>(h);
            }));
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string bench_csv(const BenchReport& report) {
    std::string out = "# sigattn bench report v1\n";
    out += "n_tokens,d,ip_us";
    for (std::size_t b : report.bit_widths) out += ",ham" + std::to_string(b) + "_us";
    out += '\n';
    for (const BenchRow& row : report.rows) {
        out += std::to_string(row.n_tokens) + ',' + std::to_string(report.d) + ',' +
               fmt_time(row.ip_us);
        for (double t : row.hamming_us) out += ',' + fmt_time(t);
        out += '\n';
    }
    return out;
}

} // namespace sigattn
