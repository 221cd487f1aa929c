#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "owsc/encoder.hpp"

namespace owsc {

struct Margins {
    double alpha = 0.25;  // object space, pull
    double beta = 1.00;   // object space, push
    double theta = 0.25;  // category space, pull
    double gamma = 4.00;  // category space, push

    void validate() const;
};

struct LossBreakdown {
    double l_piobj = 0.0;
    double l_picat = 0.0;
    double l_cat = 0.0;    // L_cat of both pair members
    double l_joint = 0.0;
    bool informative = false;  // l_piobj > 0
};

/// Object-space loss between a pair of objects. The confuser of x is the
/// per-view embedding of x nearest to y's aggregate (ties: lowest view index);
/// confusers are pulled within alpha of their own aggregate and pushed beta
/// away from the other object's confuser/aggregate. Distances are unsquared L2.
double loss_piobj(const DualEmbedding& x, const DualEmbedding& y, double alpha, double beta,
                  EmbeddingGrads* gx = nullptr, EmbeddingGrads* gy = nullptr, double scale = 1.0);

/// Category-space clustering for a same-category pair: aggregates within
/// theta of each other, every view within theta of the partner's aggregate
/// (view terms averaged over both objects' views).
double loss_picat(const DualEmbedding& x, const DualEmbedding& y, double theta,
                  EmbeddingGrads* gx = nullptr, EmbeddingGrads* gy = nullptr, double scale = 1.0);

/// Category-space separation: hinge on the nearest different-category
/// aggregate in the batch; 0 when the batch has no cross-category negative.
double loss_cat(const DualEmbedding& x, uint32_t x_category,
                const std::vector<std::pair<uint32_t, std::vector<double>>>& batch_aggregates,
                double gamma);

enum class Objective {
    JointCategory,   // S1/S2 pairs: L_cat^x + L_cat^y + L_picat + L_piobj
    JointPartition,  // S3 pairs:    L_cat^x + L_cat^y + L_piobj
};

enum class Reduction { Mean, Sum };

/// One minibatch of pairs over uniquely-encoded objects.
struct PairBatchView {
    struct ObjectEntry {
        uint32_t id = 0;
        uint32_t category = 0;
        const DualEmbedding* emb = nullptr;
    };
    std::vector<ObjectEntry> objects;
    std::vector<std::pair<uint32_t, uint32_t>> pairs;
};

struct JointLossResult {
    std::vector<LossBreakdown> per_pair;
    double value = 0.0;  // reduced joint loss
};

/// Joint objective over a batch. JointCategory requires same-category pairs.
/// L_cat negatives come from the batch's own category aggregates. When grads
/// is given, d(value)/d(embeddings) is accumulated per object id.
JointLossResult loss_joint(const PairBatchView& batch, const Margins& margins,
                           Objective objective, Reduction reduction = Reduction::Mean,
                           std::map<uint32_t, EmbeddingGrads>* grads = nullptr);

}  // namespace owsc
