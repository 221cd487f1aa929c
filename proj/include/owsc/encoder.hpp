#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "owsc/common.hpp"

namespace owsc {

struct EncoderConfig {
    int input_dim = 64;
    int embed_dim = 64;
    int n_attention_layers = 2;
    int n_heads = 1;
    double dropout_rate = 0.25;
    uint64_t seed = 0;

    void validate() const;
};

enum class TensorKind { Weight, Bias, Gain };

struct TensorSpec {
    std::string name;
    TensorKind kind;
    int rows = 0;
    int cols = 0;
    size_t offset = 0;
};

// Parameter memory is one flat vector; the layout gives named (rows x cols)
// views into it. Tensor order doubles as the checkpoint serialization order:
//   trunk.w (F x H), trunk.b (H),
//   then for each space in [obj, cat]:
//     in_w (H x D), in_b (D),
//     then per attention layer:
//       wq, wk, wv, wo (D x D), ln1_g, ln1_b (D),
//       ff_w (D x D), ff_b (D), ln2_g, ln2_b (D).
// The trunk width H equals embed_dim.
struct LayerOffsets {
    size_t wq = 0, wk = 0, wv = 0, wo = 0;
    size_t ln1_g = 0, ln1_b = 0;
    size_t ff_w = 0, ff_b = 0;
    size_t ln2_g = 0, ln2_b = 0;
};

struct SpaceOffsets {
    size_t in_w = 0, in_b = 0;
    std::vector<LayerOffsets> layers;
};

struct ParamLayout {
    ParamLayout() = default;
    explicit ParamLayout(const EncoderConfig& config);

    size_t trunk_w = 0, trunk_b = 0;
    std::array<SpaceOffsets, 2> spaces;  // 0 = object space, 1 = category space
    std::vector<TensorSpec> tensors;
    size_t total = 0;
};

struct ParamSet {
    EncoderConfig config;
    ParamLayout layout;
    std::vector<double> values;
};

ParamSet init_params(const EncoderConfig& config);

/// Per-view and aggregated embeddings in both spaces for one object's V views.
struct DualEmbedding {
    Mat obj_per_view;                  // V x D
    std::vector<double> obj_aggregate; // D
    Mat cat_per_view;                  // V x D
    std::vector<double> cat_aggregate; // D
};

struct LayerCache {
    Mat z;             // layer input, V x D
    Mat q, k, v;       // V x D
    std::vector<Mat> attn;      // per attention head, V x V, post-softmax
    std::vector<Mat> drop;      // dropout factors (0 or 1/(1-p)); empty in eval
    Mat heads_concat;  // V x D, pre output projection
    Mat r1;            // residual sum after attention
    Mat n1;            // post LN1
    std::vector<double> mu1, inv1;
    Mat ff_pre;        // pre-ReLU
    Mat ff;
    Mat r2;
    Mat out;           // post LN2
    std::vector<double> mu2, inv2;
};

struct SpaceCache {
    Mat z0;  // post input projection
    std::vector<LayerCache> layers;
};

struct EncodeCache {
    Mat x;       // V x F
    Mat t_pre;   // V x H
    Mat t;       // V x H, post ReLU
    std::array<SpaceCache, 2> spaces;
};

/// Forward pass over one object's V feature rows. Dropout is applied to the
/// attention weights only when train_mode is set, consuming rng; eval mode is
/// deterministic. Pass a cache to enable encode_backward.
DualEmbedding encode(const ParamSet& params, const Mat& features, bool train_mode, Rng& rng,
                     EncodeCache* cache = nullptr);

DualEmbedding encode_eval(const ParamSet& params, const Mat& features,
                          EncodeCache* cache = nullptr);

/// Single-image embeddings: encode with V=1 in eval mode, per-view row.
std::pair<std::vector<double>, std::vector<double>> encode_single(
    const ParamSet& params, const std::vector<float>& feature);

/// Loss gradients with respect to one object's embeddings.
struct EmbeddingGrads {
    Mat d_obj_per_view;
    std::vector<double> d_obj_aggregate;
    Mat d_cat_per_view;
    std::vector<double> d_cat_aggregate;

    void init(int v, int d);
};

/// Accumulates d(loss)/d(params) into grads (size layout.total) given the
/// cached forward pass and the loss gradients at the embedding outputs.
void encode_backward(const ParamSet& params, const EncodeCache& cache,
                     const EmbeddingGrads& emb_grads, std::vector<double>& grads);

// Checkpoint file, little-endian:
//   magic "OWSP", u32 version=1,
//   u32 input_dim, u32 embed_dim, u32 n_attention_layers, u32 n_heads,
//   f32 dropout_rate, u64 seed,
//   then every tensor in layout order as f32.
inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const ParamSet& params);
ParamSet load_checkpoint(const std::string& path);

}  // namespace owsc
