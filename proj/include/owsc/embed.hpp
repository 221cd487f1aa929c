#pragma once

#include <vector>

#include "owsc/annindex.hpp"
#include "owsc/dataset.hpp"
#include "owsc/encoder.hpp"

namespace owsc {

/// V x F feature matrix assembled from dataset record indices.
Mat features_for(const Dataset& dataset, const std::vector<size_t>& rows);

/// Eval-mode aggregated object-space embedding per object over all its images
/// of the split (the per-object vector the samplers index).
EmbeddingMap object_aggregates(const ParamSet& params, const Dataset& dataset, Split split);

/// Eval-mode per-image embeddings (V=1 path) for one split, record order.
struct ImageEmbeddings {
    std::vector<size_t> record_index;  // into dataset.records
    Mat obj;                           // n x D
    Mat cat;                           // n x D
};

ImageEmbeddings embed_images(const ParamSet& params, const Dataset& dataset, Split split);

}  // namespace owsc
