#include "sigattn/mips.hpp"

#include <cmath>
#include <stdexcept>

namespace sigattn {

namespace {
constexpr double kNormEps = 1e-12;  // clamp on ||v|| before log
}

AugmentedSet augment(const AttentionInstance& inst, const Vector& q) {
    if (q.size() != inst.d()) throw std::invalid_argument("augment: query dimension mismatch");
    const std::size_t d = inst.d();
    AugmentedSet out;
    out.aug_query.resize(d + 1);
    for (std::size_t c = 0; c < d; ++c) out.aug_query[c] = inst.scale * q[c];
    out.aug_query[d] = 1.0;
    out.aug_keys = Matrix(inst.n(), d + 1);
    for (std::size_t i = 0; i < inst.n(); ++i) {
        const double* ki = inst.keys.row(i);
        double* ai = out.aug_keys.row(i);
        for (std::size_t c = 0; c < d; ++c) ai[c] = ki[c];
        const double vn = l2_norm(inst.values.row(i), d);
        ai[d] = std::log(vn > kNormEps ? vn : kNormEps);
    }
    return out;
}

PsiSet psi_transform(const AugmentedSet& aug, PsiMode mode) {
    if (aug.aug_keys.rows == 0) throw std::invalid_argument("psi_transform: empty key set");
    const std::size_t da = aug.aug_keys.cols;  // d+1
    PsiSet out;
    double m2 = 0.0;
    for (std::size_t i = 0; i < aug.aug_keys.rows; ++i) {
        const double n = l2_norm(aug.aug_keys.row(i), da);
        if (n * n > m2) m2 = n * n;
    }
    out.M = std::sqrt(m2);
    out.psi_keys = Matrix(aug.aug_keys.rows, da + 1);
    for (std::size_t i = 0; i < aug.aug_keys.rows; ++i) {
        const double* ai = aug.aug_keys.row(i);
        double* pi = out.psi_keys.row(i);
        double n2 = 0.0;
        for (std::size_t c = 0; c < da; ++c) {
            pi[c] = ai[c];
            n2 += ai[c] * ai[c];
        }
        double rad = m2 - n2;
        if (rad < -1e-9) throw std::runtime_error("psi_transform: negative radicand, M miscomputed");
        if (rad < 0.0) rad = 0.0;
        pi[da] = std::sqrt(rad);
    }
    out.psi_query = aug.aug_query;
    out.psi_query.push_back(mode == PsiMode::exact ? 0.0 : 1.0);
    return out;
}

LshProjector make_projector(std::size_t bits, std::size_t dim, std::uint64_t seed) {
    if (bits < 1 || dim < 1) throw std::invalid_argument("make_projector: empty shape");
    Rng rng(seed);
    LshProjector proj;
    proj.projections = gaussian(rng, bits, dim, 0.0, 1.0);
    proj.seed = seed;
    return proj;
}

Signature lsh_signature(const LshProjector& proj, const Vector& x) {
    if (x.size() != proj.dim())
        throw std::invalid_argument("lsh_signature: input dimension mismatch");
    std::vector<std::uint8_t> bits(proj.bits());
    for (std::size_t j = 0; j < proj.bits(); ++j)
        bits[j] = dot(proj.projections.row(j), x.data(), x.size()) > 0.0 ? 1 : 0;
    return pack_bits(bits);
}

SignatureCache lsh_key_cache(const LshProjector& proj, const AttentionInstance& inst,
                             PsiMode mode) {
    const Vector zero_q(inst.d(), 0.0);
    const PsiSet psi = psi_transform(augment(inst, zero_q), mode);
    if (psi.psi_keys.cols != proj.dim())
        throw std::invalid_argument("lsh_key_cache: projector dimension mismatch");
    SignatureCache cache;
    cache.n = inst.n();
    cache.bits = proj.bits();
    cache.words_per_sig = (cache.bits + 63) / 64;
    cache.words.reserve(cache.n * cache.words_per_sig);
    Vector row(psi.psi_keys.cols);
    for (std::size_t i = 0; i < inst.n(); ++i) {
        row.assign(psi.psi_keys.row(i), psi.psi_keys.row(i) + psi.psi_keys.cols);
        const Signature sig = lsh_signature(proj, row);
        cache.words.insert(cache.words.end(), sig.words.begin(), sig.words.end());
    }
    return cache;
}

Signature lsh_query_signature(const LshProjector& proj, const AttentionInstance& inst,
                              const Vector& q, PsiMode mode) {
    if (q.size() != inst.d())
        throw std::invalid_argument("lsh_query_signature: query dimension mismatch");
    Vector psi_q(q.size() + 2);
    for (std::size_t c = 0; c < q.size(); ++c) psi_q[c] = inst.scale * q[c];
    psi_q[q.size()] = 1.0;
    psi_q[q.size() + 1] = mode == PsiMode::exact ? 0.0 : 1.0;
    return lsh_signature(proj, psi_q);
}

IndexSet lsh_select(const LshProjector& proj, const AttentionInstance& inst, const Vector& q,
                    std::size_t budget, std::size_t sink, std::size_t recent, PsiMode mode) {
    if (budget < 1) throw std::invalid_argument("lsh_select: budget must be >= 1");
    const SignatureCache cache = lsh_key_cache(proj, inst, mode);
    const Vector scores = hash_score(cache, lsh_query_signature(proj, inst, q, mode));
    return forced_union(topk(scores, budget), inst.n(), sink, recent);
}

} // namespace sigattn
