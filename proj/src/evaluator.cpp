#include "owsc/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

namespace owsc {

Gallery build_gallery(const ParamSet& params, const Dataset& dataset, Split split) {
    Gallery g;
    g.split = split;

    const ImageEmbeddings images = embed_images(params, dataset, split);
    if (images.record_index.empty())
        throw ConfigError("build_gallery: split has no records");
    g.obj = images.obj;
    g.cat = images.cat;
    for (size_t idx : images.record_index) {
        const auto& r = dataset.records[idx];
        g.object_ids.push_back(r.object_id);
        g.category_ids.push_back(r.category_id);
        g.state_ids.push_back(r.state_id);
    }

    const auto by_object = dataset.records_by_object(split);
    const int d = params.config.embed_dim;
    g.agg_obj = Mat(static_cast<int>(by_object.size()), d);
    g.agg_cat = Mat(static_cast<int>(by_object.size()), d);
    int row = 0;
    for (const auto& [obj, rows] : by_object) {
        DualEmbedding e = encode_eval(params, features_for(dataset, rows));
        std::copy(e.obj_aggregate.begin(), e.obj_aggregate.end(), g.agg_obj.row(row));
        std::copy(e.cat_aggregate.begin(), e.cat_aggregate.end(), g.agg_cat.row(row));
        g.agg_object_ids.push_back(obj);
        g.agg_category_ids.push_back(dataset.manifest.at(obj));
        ++row;
    }
    return g;
}

uint32_t classify(const std::vector<double>& query, const Gallery& gallery, Level level,
                  ClassifyMode mode) {
    const Mat& space = level == Level::Category ? gallery.cat : gallery.obj;
    const std::vector<uint32_t>& labels =
        level == Level::Category ? gallery.category_ids : gallery.object_ids;
    if (space.rows == 0) throw ConfigError("classify: empty gallery");

    if (mode == ClassifyMode::Centroid) {
        std::map<uint32_t, std::pair<std::vector<double>, int>> sums;
        for (int i = 0; i < space.rows; ++i) {
            auto& [sum, count] = sums[labels[i]];
            if (sum.empty()) sum.assign(space.cols, 0.0);
            const double* row = space.row(i);
            for (int j = 0; j < space.cols; ++j) sum[j] += row[j];
            ++count;
        }
        uint32_t best_label = 0;
        double best_d = -1.0;
        for (const auto& [label, entry] : sums) {
            double d = 0.0;
            for (int j = 0; j < space.cols; ++j)
                d += sq(entry.first[j] / entry.second - query[j]);
            if (best_d < 0.0 || d < best_d) {
                best_d = d;
                best_label = label;
            }
        }
        return best_label;
    }

    int best = 0;
    double best_d = squared_l2(space.row(0), query.data(), space.cols);
    for (int i = 1; i < space.rows; ++i) {
        const double d = squared_l2(space.row(i), query.data(), space.cols);
        if (d < best_d) {  // ties keep the lowest row
            best_d = d;
            best = i;
        }
    }
    return labels[best];
}

MapResult retrieval_map(const Mat& queries, const std::vector<uint32_t>& query_labels,
                        const Mat& gallery, const std::vector<uint32_t>& gallery_labels,
                        const std::vector<int>& exclude_row) {
    if (queries.rows != static_cast<int>(query_labels.size()))
        throw ConfigError("retrieval_map: query label count mismatch");
    if (gallery.rows != static_cast<int>(gallery_labels.size()))
        throw ConfigError("retrieval_map: gallery label count mismatch");

    MapResult res;
    double ap_sum = 0.0;
    std::vector<std::pair<double, int>> ranked;
    for (int qi = 0; qi < queries.rows; ++qi) {
        const int skip = qi < static_cast<int>(exclude_row.size()) ? exclude_row[qi] : -1;
        ranked.clear();
        int relevant_total = 0;
        for (int gi = 0; gi < gallery.rows; ++gi) {
            if (gi == skip) continue;
            ranked.emplace_back(squared_l2(queries.row(qi), gallery.row(gi), gallery.cols), gi);
            if (gallery_labels[gi] == query_labels[qi]) ++relevant_total;
        }
        if (relevant_total == 0) {
            ++res.skipped;
            continue;
        }
        std::sort(ranked.begin(), ranked.end());  // (distance, row) — row breaks ties

        int hits = 0;
        double ap = 0.0;
        for (size_t rank = 0; rank < ranked.size(); ++rank) {
            if (gallery_labels[ranked[rank].second] != query_labels[qi]) continue;
            ++hits;
            ap += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
        ap_sum += ap / relevant_total;
        ++res.evaluated;
    }
    if (res.evaluated == 0) throw ConfigError("retrieval_map: every query was skipped");
    res.map = 100.0 * ap_sum / res.evaluated;
    return res;
}

namespace {

double recognition_accuracy(const Mat& queries, const std::vector<uint32_t>& truth,
                            const Gallery& train, Level level, ClassifyMode mode) {
    int correct = 0;
    std::vector<double> q(queries.cols);
    for (int i = 0; i < queries.rows; ++i) {
        std::copy(queries.row(i), queries.row(i) + queries.cols, q.begin());
        if (classify(q, train, level, mode) == truth[i]) ++correct;
    }
    return 100.0 * correct / std::max(1, queries.rows);
}

std::vector<int> self_exclusion(int n) {
    std::vector<int> e(n);
    for (int i = 0; i < n; ++i) e[i] = i;
    return e;
}

}  // namespace

TaskReport score_tasks(const Gallery& train, const Gallery& test, ClassifyMode mode) {
    TaskReport r;

    // Recognition: 1-NN over train-split embeddings.
    r.sv_cat_acc = recognition_accuracy(test.cat, test.category_ids, train, Level::Category, mode);
    r.sv_obj_acc = recognition_accuracy(test.obj, test.object_ids, train, Level::Object, mode);
    r.mv_cat_acc =
        recognition_accuracy(test.agg_cat, test.agg_category_ids, train, Level::Category, mode);
    r.mv_obj_acc =
        recognition_accuracy(test.agg_obj, test.agg_object_ids, train, Level::Object, mode);
    r.acc_avg = (r.sv_cat_acc + r.mv_cat_acc + r.sv_obj_acc + r.mv_obj_acc) / 4.0;

    // Retrieval within the test split. Single-image queries rank the other
    // test images; multi-image queries use the per-object aggregates --
    // against the other objects' aggregates at category level, against the
    // per-image rows (retrieve images of this object) at object level.
    const auto sv_excl = self_exclusion(test.obj.rows);
    const MapResult sv_cat = retrieval_map(test.cat, test.category_ids, test.cat,
                                           test.category_ids, sv_excl);
    const MapResult sv_obj =
        retrieval_map(test.obj, test.object_ids, test.obj, test.object_ids, sv_excl);
    const auto mv_excl = self_exclusion(test.agg_cat.rows);
    const MapResult mv_cat = retrieval_map(test.agg_cat, test.agg_category_ids, test.agg_cat,
                                           test.agg_category_ids, mv_excl);
    const MapResult mv_obj =
        retrieval_map(test.agg_obj, test.agg_object_ids, test.obj, test.object_ids);

    r.sv_cat_map = sv_cat.map;
    r.sv_obj_map = sv_obj.map;
    r.mv_cat_map = mv_cat.map;
    r.mv_obj_map = mv_obj.map;
    r.sv_cat_skipped = sv_cat.skipped;
    r.sv_obj_skipped = sv_obj.skipped;
    r.mv_cat_skipped = mv_cat.skipped;
    r.mv_obj_skipped = mv_obj.skipped;
    r.map_avg = (r.sv_cat_map + r.mv_cat_map + r.sv_obj_map + r.mv_obj_map) / 4.0;
    return r;
}

TaskReport run_eight_tasks(const ParamSet& params, const Dataset& dataset, ClassifyMode mode) {
    const Gallery train = build_gallery(params, dataset, Split::Train);
    const Gallery test = build_gallery(params, dataset, Split::Test);
    return score_tasks(train, test, mode);
}

std::string task_report_table(const TaskReport& r) {
    char buf[512];
    std::string out;
    out += "task                 SV       MV\n";
    std::snprintf(buf, sizeof(buf), "category accuracy  %7.2f  %7.2f\n", r.sv_cat_acc,
                  r.mv_cat_acc);
    out += buf;
    std::snprintf(buf, sizeof(buf), "object accuracy    %7.2f  %7.2f\n", r.sv_obj_acc,
                  r.mv_obj_acc);
    out += buf;
    std::snprintf(buf, sizeof(buf), "category mAP       %7.2f  %7.2f\n", r.sv_cat_map,
                  r.mv_cat_map);
    out += buf;
    std::snprintf(buf, sizeof(buf), "object mAP         %7.2f  %7.2f\n", r.sv_obj_map,
                  r.mv_obj_map);
    out += buf;
    std::snprintf(buf, sizeof(buf), "averages           acc %.2f   mAP %.2f\n", r.acc_avg,
                  r.map_avg);
    out += buf;
    const int skipped =
        r.sv_cat_skipped + r.mv_cat_skipped + r.sv_obj_skipped + r.mv_obj_skipped;
    if (skipped > 0) {
        std::snprintf(buf, sizeof(buf), "skipped queries    %d\n", skipped);
        out += buf;
    }
    return out;
}

std::string task_report_csv_row(const TaskReport& r, const std::string& run_id) {
    std::string row = run_id;
    for (double v : {r.sv_cat_acc, r.mv_cat_acc, r.sv_obj_acc, r.mv_obj_acc, r.acc_avg,
                     r.sv_cat_map, r.mv_cat_map, r.sv_obj_map, r.mv_obj_map, r.map_avg})
        row += "," + fmt_g(v);
    for (int v : {r.sv_cat_skipped, r.mv_cat_skipped, r.sv_obj_skipped, r.mv_obj_skipped})
        row += "," + std::to_string(v);
    return row;
}

void export_embeddings(const ParamSet& params, const Dataset& dataset, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError(IoError::Kind::OpenFailed, "cannot open for writing: " + path);

    f << "object_id,category_id,state_id,split,space";
    for (int j = 0; j < params.config.embed_dim; ++j) f << ",dim_" << j;
    f << "\n";

    for (const auto& rec : dataset.records) {
        const auto [obj, cat] = encode_single(params, rec.feature);
        const std::string prefix = std::to_string(rec.object_id) + "," +
                                   std::to_string(rec.category_id) + "," +
                                   std::to_string(rec.state_id) + "," +
                                   (rec.split == Split::Test ? "test" : "train") + ",";
        f << prefix << "obj";
        for (double x : obj) f << "," << fmt_g(x);
        f << "\n";
        f << prefix << "cat";
        for (double x : cat) f << "," << fmt_g(x);
        f << "\n";
    }
    if (!f) throw IoError(IoError::Kind::WriteFailed, "write failed: " + path);
}

}  // namespace owsc
