#pragma once

#include <string>
#include <vector>

#include "owsc/dataset.hpp"
#include "owsc/embed.hpp"
#include "owsc/encoder.hpp"

namespace owsc {

/// Eval-mode embeddings of one split: per-image rows in both spaces plus one
/// aggregate per object for the multi-image tasks.
struct Gallery {
    Split split = Split::Train;
    // Per image, record order.
    std::vector<uint32_t> object_ids;
    std::vector<uint32_t> category_ids;
    std::vector<uint32_t> state_ids;
    Mat obj;  // n_images x D
    Mat cat;
    // Per object, id ascending.
    std::vector<uint32_t> agg_object_ids;
    std::vector<uint32_t> agg_category_ids;
    Mat agg_obj;  // n_objects x D
    Mat agg_cat;
};

Gallery build_gallery(const ParamSet& params, const Dataset& dataset, Split split);

enum class Level { Category, Object };
enum class ClassifyMode { NearestNeighbor, Centroid };

/// Label of the nearest gallery image row in the matching space (ties: lowest
/// row). Centroid mode compares against per-label mean embeddings instead.
uint32_t classify(const std::vector<double>& query, const Gallery& gallery, Level level,
                  ClassifyMode mode = ClassifyMode::NearestNeighbor);

struct MapResult {
    double map = 0.0;  // percent
    int evaluated = 0;
    int skipped = 0;  // queries without any relevant gallery item
};

/// Mean average precision over ranked squared-L2 retrieval. exclude_row[i]
/// (optional) removes one gallery row from query i's ranking — used when the
/// queries are drawn from the gallery itself.
MapResult retrieval_map(const Mat& queries, const std::vector<uint32_t>& query_labels,
                        const Mat& gallery, const std::vector<uint32_t>& gallery_labels,
                        const std::vector<int>& exclude_row = {});

struct TaskReport {
    // Recognition accuracy (%), queries from test vs train gallery.
    double sv_cat_acc = 0.0, mv_cat_acc = 0.0, sv_obj_acc = 0.0, mv_obj_acc = 0.0;
    double acc_avg = 0.0;
    // Retrieval mAP (%), within the test split.
    double sv_cat_map = 0.0, mv_cat_map = 0.0, sv_obj_map = 0.0, mv_obj_map = 0.0;
    double map_avg = 0.0;
    int sv_cat_skipped = 0, mv_cat_skipped = 0, sv_obj_skipped = 0, mv_obj_skipped = 0;
};

TaskReport score_tasks(const Gallery& train, const Gallery& test,
                       ClassifyMode mode = ClassifyMode::NearestNeighbor);

TaskReport run_eight_tasks(const ParamSet& params, const Dataset& dataset,
                           ClassifyMode mode = ClassifyMode::NearestNeighbor);

std::string task_report_table(const TaskReport& report);
inline constexpr const char* kTaskReportCsvHeader =
    "run_id,sv_cat_acc,mv_cat_acc,sv_obj_acc,mv_obj_acc,acc_avg,"
    "sv_cat_map,mv_cat_map,sv_obj_map,mv_obj_map,map_avg,"
    "sv_cat_skipped,mv_cat_skipped,sv_obj_skipped,mv_obj_skipped";
std::string task_report_csv_row(const TaskReport& report, const std::string& run_id);

/// CSV export of every image's embeddings in both spaces:
/// object_id,category_id,state_id,split,space,dim_0..dim_{D-1}
void export_embeddings(const ParamSet& params, const Dataset& dataset, const std::string& path);

}  // namespace owsc
