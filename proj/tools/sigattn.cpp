#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sigattn/harness.hpp"
#include "sigattn/mips.hpp"
#include "sigattn/signature.hpp"
#include "sigattn/training.hpp"

namespace {

using namespace sigattn;

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << text;
    if (!os) throw std::runtime_error("write failed for " + path);
}

Matrix tail_rows(const Matrix& m, std::size_t count) {
    const std::size_t take = std::min(count, m.rows);
    Matrix out(take, m.cols);
    std::copy(m.row(m.rows - take), m.row(m.rows - take) + take * m.cols, out.data.begin());
    return out;
}

Matrix head_rows(const Matrix& m, std::size_t count) {
    const std::size_t take = std::min(count, m.rows);
    Matrix out(take, m.cols);
    std::copy(m.row(0), m.row(0) + take * m.cols, out.data.begin());
    return out;
}

struct CommonEvalOpts {
    std::string trace_path;
    std::size_t budget = 64;
    std::size_t sink = 8;
    std::size_t recent = 8;
    std::size_t true_k = 32;
    std::size_t eval_queries = 500;
    std::string out_path;
};

void add_eval_flags(CLI::App* cmd, CommonEvalOpts& o) {
    cmd->add_option("--trace", o.trace_path, "trace file")->required();
    cmd->add_option("--budget", o.budget, "heavy-token budget");
    cmd->add_option("--sink", o.sink, "forced leading tokens");
    cmd->add_option("--recent", o.recent, "forced trailing tokens");
    cmd->add_option("--true-k", o.true_k, "oracle top-k the recall is measured against");
    cmd->add_option("--eval-queries", o.eval_queries, "evaluate on the last N trace queries");
    cmd->add_option("--out", o.out_path, "output CSV path (stdout when omitted)");
}

void run_learned_eval(const CommonEvalOpts& o, const std::string& checkpoint_path,
                      const std::string& cache_path) {
    const Trace trace = load_trace(o.trace_path);
    const TrainModel model = load_checkpoint(checkpoint_path);
    AttentionInstance inst(trace.keys, trace.values);
    SignatureCache cache;
    if (cache_path.empty()) {
        cache = build_cache(model.net_kv, trace.keys);
    } else {
        cache = load_cache(cache_path);
        if (cache.n != inst.n() || cache.bits != model.net_q.out_bits())
            throw std::runtime_error("cache does not match trace/checkpoint");
    }
    const Matrix evalq = tail_rows(trace.queries, o.eval_queries);
    const EvalReport rep = run_eval(
        inst, evalq,
        [&](const Vector& q) {
            return select_pivotal(cache, model.net_q, q, o.budget, o.sink, o.recent);
        },
        "learned", cache.bits, o.budget, o.sink, o.recent, o.true_k);
    write_text(o.out_path, eval_csv({rep}));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sigattn: learned bit-signature sparse attention toolkit"};
    app.require_subcommand(1);

    // gen-data
    struct {
        std::string out;
        std::size_t d = 32, n_keys = 1024, n_queries = 2500;
        std::uint64_t seed = 42;
        double shift = 0.5;
        double key_std = 1.0, query_std = 1.0;
    } gen;
    CLI::App* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic trace");
    gen_cmd->add_option("--out", gen.out, "trace output path")->required();
    gen_cmd->add_option("--d", gen.d, "vector dimension");
    gen_cmd->add_option("--n-keys", gen.n_keys, "context length");
    gen_cmd->add_option("--n-queries", gen.n_queries, "query count");
    gen_cmd->add_option("--seed", gen.seed, "generator seed");
    gen_cmd->add_option("--shift", gen.shift, "query mean shift");
    gen_cmd->add_option("--key-std", gen.key_std, "key/value std");
    gen_cmd->add_option("--query-std", gen.query_std, "query std");
    gen_cmd->callback([&] {
        save_trace(gen_data(gen.d, gen.n_keys, gen.n_queries, gen.seed, gen.shift, gen.key_std,
                            gen.query_std),
                   gen.out);
    });

    // train
    struct {
        std::string trace, checkpoint, loss_out;
        TrainConfig cfg;
        std::size_t train_queries = 2000;
    } tr;
    CLI::App* tr_cmd = app.add_subcommand("train", "train the signature networks");
    tr_cmd->add_option("--trace", tr.trace, "trace file")->required();
    tr_cmd->add_option("--checkpoint", tr.checkpoint, "checkpoint output path")->required();
    tr_cmd->add_option("--bits", tr.cfg.bits, "signature width");
    tr_cmd->add_option("--steps", tr.cfg.epochs, "epochs over the training-query stream");
    tr_cmd->add_option("--lr", tr.cfg.learning_rate, "Adam learning rate");
    tr_cmd->add_option("--alpha", tr.cfg.alpha, "class-weight offset");
    tr_cmd->add_option("--beta", tr.cfg.beta, "class-weight slope in context length");
    tr_cmd->add_option("--chunk-size", tr.cfg.chunk_size, "queries per chunk");
    tr_cmd->add_option("--seed", tr.cfg.seed, "initialization seed");
    tr_cmd->add_option("--label-k", tr.cfg.label_k, "top-k used for training labels");
    tr_cmd->add_option("--train-queries", tr.train_queries, "train on the first N trace queries");
    tr_cmd->add_option("--loss-out", tr.loss_out, "per-step loss CSV path");
    tr_cmd->callback([&] {
        const Trace trace = load_trace(tr.trace);
        const Matrix trainq = head_rows(trace.queries, tr.train_queries);
        const TrainResult res = train_chunked(trace.keys, trace.values, trainq, tr.cfg);
        save_checkpoint(res.model, tr.cfg.seed, tr.checkpoint);
        if (!tr.loss_out.empty()) {
            std::string csv = "# sigattn loss curve v1\nstep,loss\n";
            for (std::size_t i = 0; i < res.loss_curve.size(); ++i) {
                char buf[48];
                std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, res.loss_curve[i]);
                csv += buf;
            }
            write_text(tr.loss_out, csv);
        }
    });

    // build-cache
    struct {
        std::string trace, checkpoint, cache;
    } bc;
    CLI::App* bc_cmd = app.add_subcommand("build-cache", "build the packed signature cache");
    bc_cmd->add_option("--trace", bc.trace, "trace file")->required();
    bc_cmd->add_option("--checkpoint", bc.checkpoint, "checkpoint file")->required();
    bc_cmd->add_option("--cache", bc.cache, "cache output path")->required();
    bc_cmd->callback([&] {
        const Trace trace = load_trace(bc.trace);
        const TrainModel model = load_checkpoint(bc.checkpoint);
        save_cache(build_cache(model.net_kv, trace.keys), bc.cache);
    });

    // eval-recall / eval-attn-error (same report, both emphases)
    CommonEvalOpts er;
    std::string er_checkpoint, er_cache;
    CLI::App* er_cmd = app.add_subcommand("eval-recall", "recall of learned selection");
    add_eval_flags(er_cmd, er);
    er_cmd->add_option("--checkpoint", er_checkpoint, "checkpoint file")->required();
    er_cmd->add_option("--cache", er_cache, "optional prebuilt signature cache");
    er_cmd->callback([&] { run_learned_eval(er, er_checkpoint, er_cache); });

    CommonEvalOpts ee;
    std::string ee_checkpoint, ee_cache;
    CLI::App* ee_cmd =
        app.add_subcommand("eval-attn-error", "attention error of learned selection");
    add_eval_flags(ee_cmd, ee);
    ee_cmd->add_option("--checkpoint", ee_checkpoint, "checkpoint file")->required();
    ee_cmd->add_option("--cache", ee_cache, "optional prebuilt signature cache");
    ee_cmd->callback([&] { run_learned_eval(ee, ee_checkpoint, ee_cache); });

    // eval-cosine
    struct {
        std::string trace, checkpoint, out;
        std::size_t true_k = 32;
        std::size_t eval_queries = 500;
    } ec;
    CLI::App* ec_cmd = app.add_subcommand("eval-cosine", "query/key cosine shift after training");
    ec_cmd->add_option("--trace", ec.trace, "trace file")->required();
    ec_cmd->add_option("--checkpoint", ec.checkpoint, "checkpoint file")->required();
    ec_cmd->add_option("--true-k", ec.true_k, "oracle top-k");
    ec_cmd->add_option("--eval-queries", ec.eval_queries, "evaluate on the last N trace queries");
    ec_cmd->add_option("--out", ec.out, "output CSV path (stdout when omitted)");
    ec_cmd->callback([&] {
        const Trace trace = load_trace(ec.trace);
        const TrainModel model = load_checkpoint(ec.checkpoint);
        AttentionInstance inst(trace.keys, trace.values);
        const CosineShift cs = eval_cosine_shift(model.net_q, model.net_kv, inst,
                                                 tail_rows(trace.queries, ec.eval_queries),
                                                 ec.true_k);
        char buf[160];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", cs.raw, cs.tanh_c, cs.sign_c);
        write_text(ec.out, std::string("# sigattn cosine shift v1\nraw,tanh,sign\n") + buf);
    });

    // lsh-baseline
    CommonEvalOpts lb;
    std::size_t lb_bits = 32;
    std::uint64_t lb_seed = 1;
    std::string lb_psi = "exact";
    CLI::App* lb_cmd = app.add_subcommand("lsh-baseline", "signed-random-projection baseline");
    add_eval_flags(lb_cmd, lb);
    lb_cmd->add_option("--bits", lb_bits, "signature width");
    lb_cmd->add_option("--seed", lb_seed, "projector seed");
    lb_cmd->add_option("--psi-mode", lb_psi, "psi query mode")
        ->check(CLI::IsMember({"exact", "paper"}));
    lb_cmd->callback([&] {
        const Trace trace = load_trace(lb.trace_path);
        AttentionInstance inst(trace.keys, trace.values);
        const PsiMode mode = lb_psi == "exact" ? PsiMode::exact : PsiMode::paper;
        const LshProjector proj = make_projector(lb_bits, trace.d() + 2, lb_seed);
        const SignatureCache cache = lsh_key_cache(proj, inst, mode);
        const Matrix evalq = tail_rows(trace.queries, lb.eval_queries);
        const EvalReport rep = run_eval(
            inst, evalq,
            [&](const Vector& q) {
                const Vector scores = hash_score(cache, lsh_query_signature(proj, inst, q, mode));
                return forced_union(topk(scores, lb.budget), inst.n(), lb.sink, lb.recent);
            },
            "lsh", lb_bits, lb.budget, lb.sink, lb.recent, lb.true_k);
        write_text(lb.out_path, eval_csv({rep}));
    });

    // bench
    struct {
        std::vector<std::size_t> n_tokens{262144};
        std::vector<std::size_t> widths{64, 128, 256, 512};
        std::size_t d = 128;
        std::string out;
    } be;
    CLI::App* be_cmd = app.add_subcommand("bench", "hamming vs inner-product latency microbenchmark");
    be_cmd->add_option("--n-tokens", be.n_tokens, "token counts")->delimiter(',');
    be_cmd->add_option("--bit-widths", be.widths, "hamming bit widths")->delimiter(',');
    be_cmd->add_option("--d", be.d, "inner-product dimension");
    be_cmd->add_option("--out", be.out, "output CSV path (stdout when omitted)");
    be_cmd->callback([&] { write_text(be.out, bench_csv(bench_latency(be.n_tokens, be.widths, be.d))); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n' << app.help();
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
