#include "sigattn/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace sigattn {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double softplus(double t) {
    return std::log1p(std::exp(-std::abs(t))) + (t > 0.0 ? t : 0.0);
}

// Per-layer activations of a whole batch; post[0] is the input, post[l+1] the
// output of layer l (ReLU on hidden layers, raw on the last).
struct NetTape {
    std::vector<Matrix> pre;
    std::vector<Matrix> post;
};

NetTape forward_batch(const MappingNetwork& net, const Matrix& x) {
    NetTape tape;
    tape.post.push_back(x);
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        const Matrix wt = transpose(net.weights[l]);
        Matrix a = matmul(tape.post.back(), wt);
        const Vector& b = net.biases[l];
        for (std::size_t r = 0; r < a.rows; ++r) {
            double* ar = a.row(r);
            for (std::size_t c = 0; c < a.cols; ++c) ar[c] += b[c];
        }
        const bool hidden = l + 1 < net.weights.size();
        Matrix h = a;
        if (hidden)
            for (double& v : h.data)
                if (v < 0.0) v = 0.0;
        tape.pre.push_back(std::move(a));
        tape.post.push_back(std::move(h));
    }
    return tape;
}

void backward_batch(const MappingNetwork& net, const NetTape& tape, Matrix da,
                    std::vector<Matrix>& dw, std::vector<Vector>& db) {
    const std::size_t layers = net.weights.size();
    dw.resize(layers);
    db.resize(layers);
    for (std::size_t l = layers; l-- > 0;) {
        dw[l] = matmul_tn(da, tape.post[l]);
        Vector col(da.cols, 0.0);
        for (std::size_t r = 0; r < da.rows; ++r) {
            const double* dr = da.row(r);
            for (std::size_t c = 0; c < da.cols; ++c) col[c] += dr[c];
        }
        db[l] = std::move(col);
        if (l == 0) break;
        Matrix dh = matmul(da, net.weights[l]);
        const Matrix& pre_prev = tape.pre[l - 1];
        for (std::size_t i = 0; i < dh.data.size(); ++i)
            if (pre_prev.data[i] <= 0.0) dh.data[i] = 0.0;
        da = std::move(dh);
    }
}

void adam_update(Vector& m, Vector& v, double* p, const double* g, std::size_t n,
                 const TrainConfig& cfg, double bc1, double bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g[i];
        v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
}

Matrix row_slice(const Matrix& m, std::size_t begin, std::size_t end) {
    Matrix out(end - begin, m.cols);
    std::copy(m.row(begin), m.row(begin) + (end - begin) * m.cols, out.data.begin());
    return out;
}

} // namespace

TrainModel make_model(std::size_t d, const TrainConfig& cfg) {
    std::vector<std::size_t> dims;
    dims.push_back(d);
    dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
    dims.push_back(cfg.bits);
    Rng rng(cfg.seed);
    TrainModel model;
    model.net_q = make_network(dims, rng);
    model.net_kv = make_network(dims, rng);
    model.logit_scale = cfg.logit_scale;
    model.logit_bias = cfg.logit_bias;
    return model;
}

TrainBatch make_labels(const AttentionInstance& inst, const Matrix& queries,
                       std::size_t label_k) {
    if (label_k > inst.n()) throw std::invalid_argument("make_labels: label_k > n");
    if (queries.cols != inst.d())
        throw std::invalid_argument("make_labels: query dimension mismatch");
    TrainBatch batch;
    batch.queries = queries;
    batch.keys = inst.keys;
    batch.values = inst.values;
    batch.context_len = inst.n();
    batch.label_k = label_k;
    batch.labels.assign(queries.rows * inst.n(), 0);
    Vector q(inst.d());
    for (std::size_t r = 0; r < queries.rows; ++r) {
        q.assign(queries.row(r), queries.row(r) + queries.cols);
        const IndexSet top = topk(oracle_score(inst, q), label_k);
        for (std::size_t i : top) batch.labels[r * inst.n() + i] = 1;
    }
    return batch;
}

double class1_weight(const TrainConfig& cfg, std::size_t context_length) {
    const double w = cfg.alpha + cfg.beta * static_cast<double>(context_length);
    if (w <= 0.0) throw std::invalid_argument("class1_weight: nonpositive weight");
    return w;
}

Vector forward_tanh(const MappingNetwork& net, const Vector& x) {
    Vector f = forward_real(net, x);
    for (double& v : f) v = std::tanh(v);
    return f;
}

Vector logits(const TrainModel& model, const Vector& q, const Matrix& keys) {
    if (keys.cols != model.net_kv.in_dim())
        throw std::invalid_argument("logits: key dimension mismatch");
    const Vector u = forward_tanh(model.net_q, q);
    Vector out(keys.rows);
    Vector k(keys.cols);
    for (std::size_t i = 0; i < keys.rows; ++i) {
        k.assign(keys.row(i), keys.row(i) + keys.cols);
        const Vector e = forward_tanh(model.net_kv, k);
        out[i] = model.logit_scale * dot(u.data(), e.data(), u.size()) + model.logit_bias;
    }
    return out;
}

double bce_loss(const Vector& z, const std::vector<std::uint8_t>& labels, double w1) {
    if (z.size() != labels.size()) throw std::invalid_argument("bce_loss: length mismatch");
    if (w1 <= 0.0) throw std::invalid_argument("bce_loss: nonpositive class weight");
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
        sum += labels[i] ? w1 * softplus(-z[i]) : softplus(z[i]);
    return sum / static_cast<double>(z.size());
}

Gradients backward(const TrainModel& model, const TrainBatch& batch, const TrainConfig& cfg,
                   double* loss_out) {
    const std::size_t m = batch.queries.rows;
    const std::size_t n = batch.context_len;
    const double w1 = class1_weight(cfg, n);
    const double inv = 1.0 / static_cast<double>(m * n);

    NetTape tq = forward_batch(model.net_q, batch.queries);
    NetTape tk = forward_batch(model.net_kv, batch.keys);
    Matrix u = tq.post.back();
    Matrix e = tk.post.back();
    for (double& v : u.data) v = std::tanh(v);
    for (double& v : e.data) v = std::tanh(v);

    const Matrix g = matmul(u, transpose(e));  // m x n dot products
    Matrix dz(m, n);
    double loss = 0.0, dscale = 0.0, dbias = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        const double* gr = g.row(r);
        const std::uint8_t* yr = batch.labels.data() + r * n;
        double* dzr = dz.row(r);
        for (std::size_t i = 0; i < n; ++i) {
            const double z = model.logit_scale * gr[i] + model.logit_bias;
            const double s = sigmoid(z);
            if (yr[i]) {
                loss += w1 * softplus(-z);
                dzr[i] = inv * w1 * (s - 1.0);
            } else {
                loss += softplus(z);
                dzr[i] = inv * s;
            }
            dscale += dzr[i] * gr[i];
            dbias += dzr[i];
        }
    }
    if (loss_out) *loss_out = loss * inv;

    Matrix du = matmul(dz, e);       // m x b
    Matrix de = matmul_tn(dz, u);    // n x b
    for (double& v : du.data) v *= model.logit_scale;
    for (double& v : de.data) v *= model.logit_scale;
    for (std::size_t i = 0; i < du.data.size(); ++i) du.data[i] *= 1.0 - u.data[i] * u.data[i];
    for (std::size_t i = 0; i < de.data.size(); ++i) de.data[i] *= 1.0 - e.data[i] * e.data[i];

    Gradients out;
    out.dscale = dscale;
    out.dbias = dbias;
    backward_batch(model.net_q, tq, std::move(du), out.dw_q, out.db_q);
    backward_batch(model.net_kv, tk, std::move(de), out.dw_kv, out.db_kv);
    return out;
}

void adam_step(AdamState& state, TrainModel& model, const Gradients& g, const TrainConfig& cfg) {
    const std::size_t layers = model.net_q.weights.size();
    if (state.m.empty()) {
        auto add_slot = [&](std::size_t n) {
            state.m.emplace_back(n, 0.0);
            state.v.emplace_back(n, 0.0);
        };
        for (std::size_t l = 0; l < layers; ++l) add_slot(model.net_q.weights[l].data.size());
        for (std::size_t l = 0; l < layers; ++l) add_slot(model.net_q.biases[l].size());
        for (std::size_t l = 0; l < layers; ++l) add_slot(model.net_kv.weights[l].data.size());
        for (std::size_t l = 0; l < layers; ++l) add_slot(model.net_kv.biases[l].size());
        add_slot(1);
        add_slot(1);
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.t));
    std::size_t slot = 0;
    for (std::size_t l = 0; l < layers; ++l, ++slot)
        adam_update(state.m[slot], state.v[slot], model.net_q.weights[l].data.data(),
                    g.dw_q[l].data.data(), g.dw_q[l].data.size(), cfg, bc1, bc2);
    for (std::size_t l = 0; l < layers; ++l, ++slot)
        adam_update(state.m[slot], state.v[slot], model.net_q.biases[l].data(),
                    g.db_q[l].data(), g.db_q[l].size(), cfg, bc1, bc2);
    for (std::size_t l = 0; l < layers; ++l, ++slot)
        adam_update(state.m[slot], state.v[slot], model.net_kv.weights[l].data.data(),
                    g.dw_kv[l].data.data(), g.dw_kv[l].data.size(), cfg, bc1, bc2);
    for (std::size_t l = 0; l < layers; ++l, ++slot)
        adam_update(state.m[slot], state.v[slot], model.net_kv.biases[l].data(),
                    g.db_kv[l].data(), g.db_kv[l].size(), cfg, bc1, bc2);
    adam_update(state.m[slot], state.v[slot], &model.logit_scale, &g.dscale, 1, cfg, bc1, bc2);
    ++slot;
    adam_update(state.m[slot], state.v[slot], &model.logit_bias, &g.dbias, 1, cfg, bc1, bc2);
}

TrainResult train_chunked(const Matrix& keys, const Matrix& values,
                          const Matrix& train_queries, const TrainConfig& cfg) {
    if (train_queries.rows == 0) throw std::invalid_argument("train_chunked: no queries");
    if (cfg.chunk_size == 0) throw std::invalid_argument("train_chunked: zero chunk size");
    const std::size_t n = keys.rows;
    const std::size_t mq = train_queries.rows;
    const std::size_t chunks = (mq + cfg.chunk_size - 1) / cfg.chunk_size;

    auto prefix_batch = [&](std::size_t j, std::size_t nj) {
        const std::size_t q0 = j * cfg.chunk_size;
        const std::size_t q1 = std::min(mq, q0 + cfg.chunk_size);
        AttentionInstance prefix(row_slice(keys, 0, nj), row_slice(values, 0, nj));
        return make_labels(prefix, row_slice(train_queries, q0, q1),
                           std::min(cfg.label_k, nj));
    };

    std::vector<TrainBatch> grow, full;
    grow.reserve(chunks);
    full.reserve(chunks);
    for (std::size_t j = 0; j < chunks; ++j) {
        const std::size_t nj = (n * (j + 1) + chunks - 1) / chunks;
        grow.push_back(prefix_batch(j, nj));
        full.push_back(nj == n ? grow.back() : prefix_batch(j, n));
    }

    TrainResult result;
    result.model = make_model(keys.cols, cfg);
    AdamState state;
    for (std::size_t ep = 0; ep < cfg.epochs; ++ep) {
        const std::vector<TrainBatch>& stream = (ep == 0) ? grow : full;
        for (const TrainBatch& batch : stream) {
            if (batch.queries.rows == 0) continue;
            double loss = 0.0;
            const Gradients g = backward(result.model, batch, cfg, &loss);
            adam_step(state, result.model, g, cfg);
            result.loss_curve.push_back(loss);
        }
    }
    return result;
}

CosineShift eval_cosine_shift(const MappingNetwork& net_q, const MappingNetwork& net_kv,
                              const AttentionInstance& inst, const Matrix& queries,
                              std::size_t k) {
    if (k > inst.n()) throw std::invalid_argument("eval_cosine_shift: k > n");
    const std::size_t b = net_q.out_bits();
    const double inv_b = 1.0 / static_cast<double>(b);

    // Key-side representations, precomputed once.
    Matrix key_tanh(inst.n(), b);
    Matrix key_sign(inst.n(), b);
    Vector key_raw_norm(inst.n());
    Vector x(inst.d());
    for (std::size_t i = 0; i < inst.n(); ++i) {
        x.assign(inst.keys.row(i), inst.keys.row(i) + inst.d());
        const Vector f = forward_real(net_kv, x);
        for (std::size_t j = 0; j < b; ++j) {
            key_tanh(i, j) = std::tanh(f[j]);
            key_sign(i, j) = f[j] > 0.0 ? 1.0 : -1.0;
        }
        key_raw_norm[i] = l2_norm(inst.keys.row(i), inst.d());
    }

    CosineShift out;
    Vector q(inst.d());
    for (std::size_t r = 0; r < queries.rows; ++r) {
        q.assign(queries.row(r), queries.row(r) + queries.cols);
        const IndexSet top = topk(oracle_score(inst, q), k);
        const double qn = l2_norm(q);
        Vector uq = forward_real(net_q, q);
        Vector ut(b), us(b);
        for (std::size_t j = 0; j < b; ++j) {
            ut[j] = std::tanh(uq[j]);
            us[j] = uq[j] > 0.0 ? 1.0 : -1.0;
        }
        const double utn = l2_norm(ut);
        double raw = 0.0, tanh_c = 0.0, sign_c = 0.0;
        for (std::size_t i : top) {
            raw += dot(q.data(), inst.keys.row(i), inst.d()) / (qn * key_raw_norm[i]);
            tanh_c += dot(ut.data(), key_tanh.row(i), b) /
                      (utn * l2_norm(key_tanh.row(i), b));
            sign_c += dot(us.data(), key_sign.row(i), b) * inv_b;
        }
        const double invk = 1.0 / static_cast<double>(top.size());
        out.raw += raw * invk;
        out.tanh_c += tanh_c * invk;
        out.sign_c += sign_c * invk;
    }
    const double invm = 1.0 / static_cast<double>(queries.rows);
    out.raw *= invm;
    out.tanh_c *= invm;
    out.sign_c *= invm;
    return out;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson net_to_json(const MappingNetwork& net) {
    ojson j;
    ojson ws = ojson::array();
    ojson bs = ojson::array();
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        const Matrix& w = net.weights[l];
        ojson rows = ojson::array();
        for (std::size_t r = 0; r < w.rows; ++r)
            rows.push_back(std::vector<double>(w.row(r), w.row(r) + w.cols));
        ws.push_back(std::move(rows));
        bs.push_back(net.biases[l]);
    }
    j["weights"] = std::move(ws);
    j["biases"] = std::move(bs);
    return j;
}

MappingNetwork net_from_json(const ojson& j, const std::vector<std::size_t>& dims) {
    MappingNetwork net;
    net.layer_dims = dims;
    const ojson& ws = j.at("weights");
    const ojson& bs = j.at("biases");
    if (ws.size() + 1 != dims.size() || bs.size() != ws.size())
        throw std::runtime_error("checkpoint: layer count mismatch");
    for (std::size_t l = 0; l < ws.size(); ++l) {
        Matrix w(dims[l + 1], dims[l]);
        const ojson& rows = ws[l];
        if (rows.size() != dims[l + 1]) throw std::runtime_error("checkpoint: row count mismatch");
        for (std::size_t r = 0; r < w.rows; ++r) {
            const auto row = rows[r].get<std::vector<double>>();
            if (row.size() != w.cols) throw std::runtime_error("checkpoint: col count mismatch");
            std::copy(row.begin(), row.end(), w.row(r));
        }
        net.weights.push_back(std::move(w));
        net.biases.push_back(bs[l].get<Vector>());
    }
    return net;
}

} // namespace

void save_checkpoint(const TrainModel& model, std::uint64_t seed, const std::string& path) {
    ojson j;
    j["format_version"] = 1;
    j["arch"] = model.net_q.layer_dims;
    j["activation"] = "relu";
    j["bits"] = model.net_q.out_bits();
    j["logit_scale"] = model.logit_scale;
    j["logit_bias"] = model.logit_bias;
    j["seed"] = seed;
    j["query_net"] = net_to_json(model.net_q);
    j["key_net"] = net_to_json(model.net_kv);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
    os << j.dump();
    os.put('\n');
    if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

TrainModel load_checkpoint(const std::string& path, std::uint64_t* seed_out) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
    ojson j;
    is >> j;
    if (j.at("format_version").get<int>() != 1)
        throw std::runtime_error("load_checkpoint: unsupported format version");
    const auto dims = j.at("arch").get<std::vector<std::size_t>>();
    TrainModel model;
    model.net_q = net_from_json(j.at("query_net"), dims);
    model.net_kv = net_from_json(j.at("key_net"), dims);
    model.logit_scale = j.at("logit_scale").get<double>();
    model.logit_bias = j.at("logit_bias").get<double>();
    if (seed_out) *seed_out = j.at("seed").get<std::uint64_t>();
    return model;
}

} // namespace sigattn
