#pragma once

#include <cstddef>
#include <vector>

#include "sigattn/numerics.hpp"

namespace sigattn {

// One attention problem: keys K (n x d), values V (n x d), scale = 1/sqrt(d).
// The scale is applied everywhere, including the single-query form.
struct AttentionInstance {
    Matrix keys;
    Matrix values;
    double scale;

    AttentionInstance(Matrix k, Matrix v);

    std::size_t n() const { return keys.rows; }
    std::size_t d() const { return keys.cols; }
};

// Sorted unique token positions in [0, n).
using IndexSet = std::vector<std::size_t>;

struct RecallReport {
    std::size_t n_selected = 0;
    std::size_t k_true = 0;
    double recall = 0.0;
    std::vector<double> per_query;
};

// a_i = softmax over i of scale * <K[i], q>; sums to 1.
Vector attention_scores(const AttentionInstance& inst, const Vector& q);

// sum_i a_i * V[i].
Vector sdpa(const AttentionInstance& inst, const Vector& q);

// Renormalized softmax over the selected tokens only, then weighted value sum.
Vector sparse_att(const AttentionInstance& inst, const Vector& q, const IndexSet& sel);

// score_i = a_i * ||V[i]||_2, the single-token contribution bound.
Vector oracle_score(const AttentionInstance& inst, const Vector& q);

// Indices of the k largest scores; ties broken by smaller index; sorted ascending.
IndexSet topk(const Vector& scores, std::size_t k);

// |selected ∩ true_topk| / |true_topk|.
double recall(const IndexSet& selected, const IndexSet& true_topk);

// sel ∪ [0, sink) ∪ [n-recent, n); sorted, deduplicated. Forced tokens are
// additional to the heavy-token budget of sel.
IndexSet forced_union(const IndexSet& sel, std::size_t n, std::size_t sink, std::size_t recent);

} // namespace sigattn
