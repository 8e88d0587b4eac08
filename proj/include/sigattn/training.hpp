#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sigattn/attention.hpp"
#include "sigattn/numerics.hpp"
#include "sigattn/signature.hpp"

namespace sigattn {

struct TrainConfig {
    std::size_t label_k = 64;
    double alpha = 1.0;
    double beta = 1.0 / 64.0;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t chunk_size = 125;
    std::size_t epochs = 300;  // passes over the training-query stream
    std::uint64_t seed = 0;
    double logit_scale = 1.0;  // initial value; trained thereafter
    double logit_bias = 0.0;
    std::size_t bits = 32;
    std::vector<std::size_t> hidden = {128, 128};
};

// The trainable artifact: both mapping networks plus the scalar logit head.
struct TrainModel {
    MappingNetwork net_q;
    MappingNetwork net_kv;
    double logit_scale = 1.0;
    double logit_bias = 0.0;
};

TrainModel make_model(std::size_t d, const TrainConfig& cfg);

// One chunk's worth of training data. labels is m x n row-major {0,1} with
// exactly label_k ones per row; context_len = n is recorded for class weighting.
struct TrainBatch {
    Matrix queries;               // m x d
    Matrix keys;                  // n x d
    Matrix values;                // n x d
    std::vector<std::uint8_t> labels;  // m * n
    std::size_t context_len = 0;
    std::size_t label_k = 0;
};

// Per-query binary rows with ones exactly at topk(oracle_score, label_k).
TrainBatch make_labels(const AttentionInstance& inst, const Matrix& queries,
                       std::size_t label_k);

// alpha + beta * L.
double class1_weight(const TrainConfig& cfg, std::size_t context_length);

// tanh(F(x)) elementwise.
Vector forward_tanh(const MappingNetwork& net, const Vector& x);

// logit_i = logit_scale * <tanh(F_q(q)), tanh(F_kv(k_i))> + logit_bias.
Vector logits(const TrainModel& model, const Vector& q, const Matrix& keys);

// Mean over tokens of -[w1*y*log(sigmoid(z)) + (1-y)*log(1-sigmoid(z))],
// computed in the stable softplus form.
double bce_loss(const Vector& z, const std::vector<std::uint8_t>& labels, double w1);

struct Gradients {
    std::vector<Matrix> dw_q, dw_kv;
    std::vector<Vector> db_q, db_kv;
    double dscale = 0.0;
    double dbias = 0.0;
};

// Exact gradients of the mean weighted BCE over the whole batch (all queries
// and tokens) w.r.t. every parameter of both networks and the logit head.
// Also returns the batch loss through *loss_out when non-null.
Gradients backward(const TrainModel& model, const TrainBatch& batch, const TrainConfig& cfg,
                   double* loss_out = nullptr);

struct AdamState {
    std::vector<Vector> m, v;  // flattened, one slot per parameter tensor
    std::size_t t = 0;
};

// Standard bias-corrected Adam over (net_q, net_kv, logit_scale, logit_bias).
void adam_step(AdamState& state, TrainModel& model, const Gradients& g, const TrainConfig& cfg);

struct TrainResult {
    TrainModel model;
    std::vector<double> loss_curve;  // one entry per optimizer step
};

// Chunked training: on the first pass the KV cache grows with the chunk index
// (chunk j of C sees the first ceil(n*(j+1)/C) keys); on later passes the
// cache is already fully grown, so every chunk trains against all n keys.
// One optimizer step per chunk; labels and class weights recomputed per
// (chunk, context-length) pair.
TrainResult train_chunked(const Matrix& keys, const Matrix& values,
                          const Matrix& train_queries, const TrainConfig& cfg);

struct CosineShift {
    double raw = 0.0;
    double tanh_c = 0.0;
    double sign_c = 0.0;
};

// Mean cosine between each query representation and its oracle top-k key
// representations under raw vectors, tanh embeddings, and +-1 sign embeddings.
CosineShift eval_cosine_shift(const MappingNetwork& net_q, const MappingNetwork& net_kv,
                              const AttentionInstance& inst, const Matrix& queries,
                              std::size_t k);

// JSON checkpoint; deterministic bytes, exact double round-trip.
void save_checkpoint(const TrainModel& model, std::uint64_t seed, const std::string& path);
TrainModel load_checkpoint(const std::string& path, std::uint64_t* seed_out = nullptr);

} // namespace sigattn
