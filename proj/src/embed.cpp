#include "owsc/embed.hpp"

namespace owsc {

Mat features_for(const Dataset& dataset, const std::vector<size_t>& rows) {
    Mat out(static_cast<int>(rows.size()), dataset.feature_dim);
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto& feat = dataset.records[rows[i]].feature;
        double* dst = out.row(static_cast<int>(i));
        for (int j = 0; j < dataset.feature_dim; ++j) dst[j] = feat[j];
    }
    return out;
}

EmbeddingMap object_aggregates(const ParamSet& params, const Dataset& dataset, Split split) {
    EmbeddingMap out;
    for (const auto& [obj, rows] : dataset.records_by_object(split)) {
        if (rows.empty()) continue;
        DualEmbedding e = encode_eval(params, features_for(dataset, rows));
        out[obj] = std::move(e.obj_aggregate);
    }
    return out;
}

ImageEmbeddings embed_images(const ParamSet& params, const Dataset& dataset, Split split) {
    ImageEmbeddings out;
    for (size_t i = 0; i < dataset.records.size(); ++i)
        if (dataset.records[i].split == split) out.record_index.push_back(i);

    const int n = static_cast<int>(out.record_index.size());
    const int d = params.config.embed_dim;
    out.obj = Mat(n, d);
    out.cat = Mat(n, d);
    for (int i = 0; i < n; ++i) {
        auto [obj, cat] = encode_single(params, dataset.records[out.record_index[i]].feature);
        std::copy(obj.begin(), obj.end(), out.obj.row(i));
        std::copy(cat.begin(), cat.end(), out.cat.row(i));
    }
    return out;
}

}  // namespace owsc
