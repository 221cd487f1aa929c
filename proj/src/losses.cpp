#include "owsc/losses.hpp"

#include <cmath>
#include <string>

namespace owsc {

void Margins::validate() const {
    if (alpha <= 0.0 || beta <= 0.0 || theta <= 0.0 || gamma <= 0.0)
        throw ConfigError("margins: all margins must be > 0");
    if (beta <= alpha) throw ConfigError("margins: beta must exceed alpha");
    if (gamma <= theta) throw ConfigError("margins: gamma must exceed theta");
}

namespace {

double dist(const double* a, const double* b, int d) { return std::sqrt(squared_l2(a, b, d)); }

/// Adds coeff * d‖u−v‖/d{u,v} into the (nullable) sinks. Zero at coincident
/// points, matching the hinge-kink convention.
void add_dist_grad(const double* u, const double* v, int d, double coeff, double* du,
                   double* dv) {
    const double dd = dist(u, v, d);
    if (dd <= 0.0) return;
    const double c = coeff / dd;
    for (int i = 0; i < d; ++i) {
        const double g = c * (u[i] - v[i]);
        if (du) du[i] += g;
        if (dv) dv[i] -= g;
    }
}

int argmin_view(const Mat& views, const std::vector<double>& target) {
    int best = 0;
    double best_d = squared_l2(views.row(0), target.data(), views.cols);
    for (int i = 1; i < views.rows; ++i) {
        const double d = squared_l2(views.row(i), target.data(), views.cols);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace

double loss_piobj(const DualEmbedding& x, const DualEmbedding& y, double alpha, double beta,
                  EmbeddingGrads* gx, EmbeddingGrads* gy, double scale) {
    const int d = static_cast<int>(x.obj_aggregate.size());
    const int ix = argmin_view(x.obj_per_view, y.obj_aggregate);
    const int iy = argmin_view(y.obj_per_view, x.obj_aggregate);
    const double* ax = x.obj_per_view.row(ix);
    const double* ay = y.obj_per_view.row(iy);
    const double* mx = x.obj_aggregate.data();
    const double* my = y.obj_aggregate.data();

    double* d_ax = gx ? gx->d_obj_per_view.row(ix) : nullptr;
    double* d_ay = gy ? gy->d_obj_per_view.row(iy) : nullptr;
    double* d_mx = gx ? gx->d_obj_aggregate.data() : nullptr;
    double* d_my = gy ? gy->d_obj_aggregate.data() : nullptr;

    double total = 0.0;

    // Pull the confusers within alpha of their own aggregate.
    const double pull_x = dist(ax, mx, d) - alpha;
    if (pull_x > 0.0) {
        total += pull_x;
        add_dist_grad(ax, mx, d, scale, d_ax, d_mx);
    }
    const double pull_y = dist(ay, my, d) - alpha;
    if (pull_y > 0.0) {
        total += pull_y;
        add_dist_grad(ay, my, d, scale, d_ay, d_my);
    }

    // Push confusers and aggregates of different objects beta apart.
    const double push1 = beta - dist(ax, my, d);
    if (push1 > 0.0) {
        total += push1;
        add_dist_grad(ax, my, d, -scale, d_ax, d_my);
    }
    const double push2 = beta - dist(ay, mx, d);
    if (push2 > 0.0) {
        total += push2;
        add_dist_grad(ay, mx, d, -scale, d_ay, d_mx);
    }
    const double push3 = beta - dist(mx, my, d);
    if (push3 > 0.0) {
        total += push3;
        add_dist_grad(mx, my, d, -scale, d_mx, d_my);
    }
    return total;
}

double loss_picat(const DualEmbedding& x, const DualEmbedding& y, double theta,
                  EmbeddingGrads* gx, EmbeddingGrads* gy, double scale) {
    const int d = static_cast<int>(x.cat_aggregate.size());
    const double* mx = x.cat_aggregate.data();
    const double* my = y.cat_aggregate.data();
    double* d_mx = gx ? gx->d_cat_aggregate.data() : nullptr;
    double* d_my = gy ? gy->d_cat_aggregate.data() : nullptr;

    double total = 0.0;
    const double agg_term = dist(mx, my, d) - theta;
    if (agg_term > 0.0) {
        total += agg_term;
        add_dist_grad(mx, my, d, scale, d_mx, d_my);
    }

    const double w = 1.0 / (x.cat_per_view.rows + y.cat_per_view.rows);
    for (int i = 0; i < x.cat_per_view.rows; ++i) {
        const double* ci = x.cat_per_view.row(i);
        const double term = dist(ci, my, d) - theta;
        if (term > 0.0) {
            total += w * term;
            add_dist_grad(ci, my, d, scale * w, gx ? gx->d_cat_per_view.row(i) : nullptr, d_my);
        }
    }
    for (int j = 0; j < y.cat_per_view.rows; ++j) {
        const double* cj = y.cat_per_view.row(j);
        const double term = dist(cj, mx, d) - theta;
        if (term > 0.0) {
            total += w * term;
            add_dist_grad(cj, mx, d, scale * w, gy ? gy->d_cat_per_view.row(j) : nullptr, d_mx);
        }
    }
    return total;
}

namespace {

/// Index of the nearest different-category aggregate, or -1.
int nearest_negative(const std::vector<double>& x_agg, uint32_t x_category,
                     const std::vector<std::pair<uint32_t, std::vector<double>>>& batch) {
    int best = -1;
    double best_d = 0.0;
    for (size_t i = 0; i < batch.size(); ++i) {
        if (batch[i].first == x_category) continue;
        const double d = squared_l2(x_agg, batch[i].second);
        if (best < 0 || d < best_d) {
            best = static_cast<int>(i);
            best_d = d;
        }
    }
    return best;
}

}  // namespace

double loss_cat(const DualEmbedding& x, uint32_t x_category,
                const std::vector<std::pair<uint32_t, std::vector<double>>>& batch_aggregates,
                double gamma) {
    const int neg = nearest_negative(x.cat_aggregate, x_category, batch_aggregates);
    if (neg < 0) return 0.0;
    const double term = gamma - l2(x.cat_aggregate, batch_aggregates[neg].second);
    return term > 0.0 ? term : 0.0;
}

JointLossResult loss_joint(const PairBatchView& batch, const Margins& margins,
                           Objective objective, Reduction reduction,
                           std::map<uint32_t, EmbeddingGrads>* grads) {
    margins.validate();
    if (batch.pairs.empty()) throw ConfigError("loss_joint: empty pair batch");

    std::map<uint32_t, const PairBatchView::ObjectEntry*> by_id;
    for (const auto& o : batch.objects) by_id[o.id] = &o;

    // Batch-context category aggregates for the L_cat negatives.
    std::vector<std::pair<uint32_t, std::vector<double>>> context;
    std::vector<uint32_t> context_ids;
    context.reserve(batch.objects.size());
    for (const auto& o : batch.objects) {
        context.emplace_back(o.category, o.emb->cat_aggregate);
        context_ids.push_back(o.id);
    }

    const double scale =
        reduction == Reduction::Mean ? 1.0 / static_cast<double>(batch.pairs.size()) : 1.0;

    if (grads)
        for (const auto& o : batch.objects) {
            auto& g = (*grads)[o.id];
            if (g.d_obj_per_view.rows == 0)
                g.init(o.emb->obj_per_view.rows, o.emb->obj_per_view.cols);
        }

    auto cat_term = [&](const PairBatchView::ObjectEntry& o) -> double {
        const int neg = nearest_negative(o.emb->cat_aggregate, o.category, context);
        if (neg < 0) return 0.0;
        const double dd = l2(o.emb->cat_aggregate, context[neg].second);
        const double term = margins.gamma - dd;
        if (term <= 0.0) return 0.0;
        if (grads) {
            EmbeddingGrads& go = (*grads)[o.id];
            EmbeddingGrads& gz = (*grads)[context_ids[neg]];
            add_dist_grad(o.emb->cat_aggregate.data(), context[neg].second.data(),
                          static_cast<int>(o.emb->cat_aggregate.size()), -scale,
                          go.d_cat_aggregate.data(), gz.d_cat_aggregate.data());
        }
        return term;
    };

    JointLossResult res;
    res.per_pair.reserve(batch.pairs.size());
    double sum = 0.0;
    for (const auto& [x_id, y_id] : batch.pairs) {
        auto xit = by_id.find(x_id);
        auto yit = by_id.find(y_id);
        if (xit == by_id.end() || yit == by_id.end())
            throw ConfigError("loss_joint: pair references an object missing from the batch");
        const auto& ox = *xit->second;
        const auto& oy = *yit->second;
        if (objective == Objective::JointCategory && ox.category != oy.category)
            throw ConfigError("loss_joint: same-category objective got a cross-category pair (" +
                              std::to_string(x_id) + "," + std::to_string(y_id) + ")");

        EmbeddingGrads* gx = grads ? &(*grads)[x_id] : nullptr;
        EmbeddingGrads* gy = grads ? &(*grads)[y_id] : nullptr;

        LossBreakdown b;
        b.l_piobj = loss_piobj(*ox.emb, *oy.emb, margins.alpha, margins.beta, gx, gy, scale);
        if (objective == Objective::JointCategory)
            b.l_picat = loss_picat(*ox.emb, *oy.emb, margins.theta, gx, gy, scale);
        b.l_cat = cat_term(ox) + cat_term(oy);
        b.l_joint = b.l_piobj + b.l_picat + b.l_cat;
        b.informative = b.l_piobj > 0.0;
        sum += b.l_joint;
        res.per_pair.push_back(b);
    }
    res.value = reduction == Reduction::Mean ? sum / batch.pairs.size() : sum;
    return res;
}

}  // namespace owsc
