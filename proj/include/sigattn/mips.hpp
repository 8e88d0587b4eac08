#pragma once

#include <cstdint>

#include "sigattn/attention.hpp"
#include "sigattn/numerics.hpp"
#include "sigattn/signature.hpp"

namespace sigattn {

// MIPS augmentation. aug_query carries the attention scale so that
// <aug_query, aug_key_i> = scale*<q,k_i> + log||v_i|| orders exactly like
// a_i*||v_i|| (softmax and exp are strictly monotone).
struct AugmentedSet {
    Vector aug_query;  // [scale*q, 1], length d+1
    Matrix aug_keys;   // n x (d+1), row i = [k_i, log max(||v_i||, eps)]
};

AugmentedSet augment(const AttentionInstance& inst, const Vector& q);

// exact: psi_query = [q', 1, 0] (asymmetric zero pad, ordering-exact).
// paper: psi_query = [q', 1, 1], symmetric variant kept for ablation; the
// key-side pad coordinate then enters the inner product, so ordering is
// only approximate.
enum class PsiMode { exact, paper };

struct PsiSet {
    Vector psi_query;  // length d+2
    Matrix psi_keys;   // n x (d+2); every row has norm M
    double M = 0.0;    // max augmented key norm over the key set
};

PsiSet psi_transform(const AugmentedSet& aug, PsiMode mode);

// b i.i.d. standard-normal projection rows, fixed per seed, never trained.
struct LshProjector {
    Matrix projections;  // bits x dim
    std::uint64_t seed = 0;

    std::size_t bits() const { return projections.rows; }
    std::size_t dim() const { return projections.cols; }
};

LshProjector make_projector(std::size_t bits, std::size_t dim, std::uint64_t seed);

// bit j = 1 iff <projections[j], x> > 0; packed like every other signature.
Signature lsh_signature(const LshProjector& proj, const Vector& x);

// LSH signatures of all psi-transformed keys, computed once per instance;
// the query side only needs the attention scale, so signatures can be reused
// across queries.
SignatureCache lsh_key_cache(const LshProjector& proj, const AttentionInstance& inst,
                             PsiMode mode = PsiMode::exact);
Signature lsh_query_signature(const LshProjector& proj, const AttentionInstance& inst,
                              const Vector& q, PsiMode mode = PsiMode::exact);

// Hamming top-k over LSH signatures of the psi-transformed instance, with
// forced union; drop-in comparator for the learned select_pivotal. One
// projector serves both sides (psi_q and psi_kv share dim d+2 and the seed).
IndexSet lsh_select(const LshProjector& proj, const AttentionInstance& inst, const Vector& q,
                    std::size_t budget, std::size_t sink, std::size_t recent,
                    PsiMode mode = PsiMode::exact);

} // namespace sigattn
