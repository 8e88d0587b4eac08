#include "sigattn/attention.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sigattn {

AttentionInstance::AttentionInstance(Matrix k, Matrix v)
    : keys(std::move(k)), values(std::move(v)) {
    if (keys.rows == 0 || keys.cols == 0)
        throw std::invalid_argument("AttentionInstance: empty keys");
    if (values.rows != keys.rows || values.cols != keys.cols)
        throw std::invalid_argument("AttentionInstance: key/value shape mismatch");
    scale = 1.0 / std::sqrt(static_cast<double>(keys.cols));
}

Vector attention_scores(const AttentionInstance& inst, const Vector& q) {
    if (q.size() != inst.d())
        throw std::invalid_argument("attention_scores: query dimension mismatch");
    Vector logits(inst.n());
    for (std::size_t i = 0; i < inst.n(); ++i)
        logits[i] = inst.scale * dot(inst.keys.row(i), q.data(), inst.d());
    return softmax(logits);
}

Vector sdpa(const AttentionInstance& inst, const Vector& q) {
    const Vector a = attention_scores(inst, q);
    Vector out(inst.d(), 0.0);
    for (std::size_t i = 0; i < inst.n(); ++i) {
        const double* vi = inst.values.row(i);
        for (std::size_t c = 0; c < inst.d(); ++c) out[c] += a[i] * vi[c];
    }
    return out;
}

Vector sparse_att(const AttentionInstance& inst, const Vector& q, const IndexSet& sel) {
    if (sel.empty()) throw std::invalid_argument("sparse_att: empty selection");
    if (q.size() != inst.d())
        throw std::invalid_argument("sparse_att: query dimension mismatch");
    Vector logits(sel.size());
    for (std::size_t s = 0; s < sel.size(); ++s) {
        if (sel[s] >= inst.n()) throw std::invalid_argument("sparse_att: index out of range");
        logits[s] = inst.scale * dot(inst.keys.row(sel[s]), q.data(), inst.d());
    }
    const Vector a = softmax(logits);
    Vector out(inst.d(), 0.0);
    for (std::size_t s = 0; s < sel.size(); ++s) {
        const double* vi = inst.values.row(sel[s]);
        for (std::size_t c = 0; c < inst.d(); ++c) out[c] += a[s] * vi[c];
    }
    return out;
}

Vector oracle_score(const AttentionInstance& inst, const Vector& q) {
    const Vector a = attention_scores(inst, q);
    Vector out(inst.n());
    for (std::size_t i = 0; i < inst.n(); ++i)
        out[i] = a[i] * l2_norm(inst.values.row(i), inst.d());
    return out;
}

IndexSet topk(const Vector& scores, std::size_t k) {
    const std::size_t n = scores.size();
    if (k < 1 || k > n) throw std::invalid_argument("topk: k out of range");
    IndexSet idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

double recall(const IndexSet& selected, const IndexSet& true_topk) {
    if (true_topk.empty()) throw std::invalid_argument("recall: empty true top-k");
    std::size_t hits = 0;
    auto it = selected.begin();
    for (std::size_t t : true_topk) {
        while (it != selected.end() && *it < t) ++it;
        if (it != selected.end() && *it == t) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(true_topk.size());
}

IndexSet forced_union(const IndexSet& sel, std::size_t n, std::size_t sink, std::size_t recent) {
    if (sink + recent > n) throw std::invalid_argument("forced_union: sink + recent > n");
    IndexSet out = sel;
    for (std::size_t i = 0; i < sink; ++i) out.push_back(i);
    for (std::size_t i = n - recent; i < n; ++i) out.push_back(i);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace sigattn
