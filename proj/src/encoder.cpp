#include "owsc/encoder.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace owsc {

namespace {
constexpr double kLnEps = 1e-5;
}

void EncoderConfig::validate() const {
    if (input_dim < 1) throw ConfigError("encoder config: input_dim must be >= 1");
    if (embed_dim < 1) throw ConfigError("encoder config: embed_dim must be >= 1");
    if (n_attention_layers < 1)
        throw ConfigError("encoder config: n_attention_layers must be >= 1");
    if (n_heads < 1) throw ConfigError("encoder config: n_heads must be >= 1");
    if (embed_dim % n_heads != 0)
        throw ConfigError("encoder config: embed_dim must be divisible by n_heads");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw ConfigError("encoder config: dropout_rate must be in [0,1)");
}

ParamLayout::ParamLayout(const EncoderConfig& config) {
    const int f = config.input_dim;
    const int d = config.embed_dim;
    const int h = d;  // trunk width

    auto add = [&](const std::string& name, TensorKind kind, int rows, int cols) {
        TensorSpec spec{name, kind, rows, cols, total};
        total += static_cast<size_t>(rows) * cols;
        tensors.push_back(spec);
        return spec.offset;
    };

    trunk_w = add("trunk.w", TensorKind::Weight, f, h);
    trunk_b = add("trunk.b", TensorKind::Bias, 1, h);

    const char* space_names[2] = {"obj", "cat"};
    for (int s = 0; s < 2; ++s) {
        const std::string p = std::string(space_names[s]) + ".";
        spaces[s].in_w = add(p + "in_w", TensorKind::Weight, h, d);
        spaces[s].in_b = add(p + "in_b", TensorKind::Bias, 1, d);
        spaces[s].layers.resize(config.n_attention_layers);
        for (int l = 0; l < config.n_attention_layers; ++l) {
            const std::string lp = p + "l" + std::to_string(l) + ".";
            auto& lo = spaces[s].layers[l];
            lo.wq = add(lp + "wq", TensorKind::Weight, d, d);
            lo.wk = add(lp + "wk", TensorKind::Weight, d, d);
            lo.wv = add(lp + "wv", TensorKind::Weight, d, d);
            lo.wo = add(lp + "wo", TensorKind::Weight, d, d);
            lo.ln1_g = add(lp + "ln1_g", TensorKind::Gain, 1, d);
            lo.ln1_b = add(lp + "ln1_b", TensorKind::Bias, 1, d);
            lo.ff_w = add(lp + "ff_w", TensorKind::Weight, d, d);
            lo.ff_b = add(lp + "ff_b", TensorKind::Bias, 1, d);
            lo.ln2_g = add(lp + "ln2_g", TensorKind::Gain, 1, d);
            lo.ln2_b = add(lp + "ln2_b", TensorKind::Bias, 1, d);
        }
    }
}

ParamSet init_params(const EncoderConfig& config) {
    config.validate();
    ParamSet p;
    p.config = config;
    p.layout = ParamLayout(config);
    p.values.assign(p.layout.total, 0.0);

    Rng rng(derive_seed(config.seed, {21}));
    for (const auto& t : p.layout.tensors) {
        double* dst = p.values.data() + t.offset;
        const size_t n = static_cast<size_t>(t.rows) * t.cols;
        switch (t.kind) {
            case TensorKind::Weight: {
                const double scale = 1.0 / std::sqrt(static_cast<double>(t.rows));
                for (size_t i = 0; i < n; ++i) dst[i] = scale * rng.normal();
                break;
            }
            case TensorKind::Bias:
                break;  // zeros
            case TensorKind::Gain:
                for (size_t i = 0; i < n; ++i) dst[i] = 1.0;
                break;
        }
    }
    return p;
}

namespace {

// Y = X * W + b, X: v x in, W: in x out.
void linear(const double* x, const double* w, const double* b, int v, int in, int out,
            double* y) {
    for (int i = 0; i < v; ++i) {
        double* yi = y + static_cast<size_t>(i) * out;
        if (b)
            std::memcpy(yi, b, sizeof(double) * out);
        else
            std::memset(yi, 0, sizeof(double) * out);
        const double* xi = x + static_cast<size_t>(i) * in;
        for (int k = 0; k < in; ++k) {
            const double xik = xi[k];
            const double* wk = w + static_cast<size_t>(k) * out;
            for (int j = 0; j < out; ++j) yi[j] += xik * wk[j];
        }
    }
}

// Accumulates dW += X^T dY, db += colsum(dY), dX += dY W^T.
void linear_backward(const double* x, const double* w, const double* dy, int v, int in, int out,
                     double* dw, double* db, double* dx) {
    for (int i = 0; i < v; ++i) {
        const double* xi = x + static_cast<size_t>(i) * in;
        const double* dyi = dy + static_cast<size_t>(i) * out;
        for (int k = 0; k < in; ++k) {
            const double xik = xi[k];
            double* dwk = dw + static_cast<size_t>(k) * out;
            for (int j = 0; j < out; ++j) dwk[j] += xik * dyi[j];
        }
        if (db)
            for (int j = 0; j < out; ++j) db[j] += dyi[j];
        if (dx) {
            double* dxi = dx + static_cast<size_t>(i) * in;
            for (int k = 0; k < in; ++k) {
                const double* wk = w + static_cast<size_t>(k) * out;
                double s = 0.0;
                for (int j = 0; j < out; ++j) s += dyi[j] * wk[j];
                dxi[k] += s;
            }
        }
    }
}

void layer_norm(const Mat& x, const double* gain, const double* bias, Mat& y,
                std::vector<double>& mu, std::vector<double>& inv) {
    const int d = x.cols;
    mu.resize(x.rows);
    inv.resize(x.rows);
    if (y.rows != x.rows || y.cols != d) y = Mat(x.rows, d);
    for (int i = 0; i < x.rows; ++i) {
        const double* xi = x.row(i);
        double m = 0.0;
        for (int j = 0; j < d; ++j) m += xi[j];
        m /= d;
        double var = 0.0;
        for (int j = 0; j < d; ++j) var += sq(xi[j] - m);
        var /= d;
        const double iv = 1.0 / std::sqrt(var + kLnEps);
        mu[i] = m;
        inv[i] = iv;
        double* yi = y.row(i);
        for (int j = 0; j < d; ++j) yi[j] = gain[j] * (xi[j] - m) * iv + bias[j];
    }
}

void layer_norm_backward(const Mat& x, const double* gain, const std::vector<double>& mu,
                         const std::vector<double>& inv, const Mat& dy, Mat& dx, double* dgain,
                         double* dbias) {
    const int d = x.cols;
    if (dx.rows != x.rows || dx.cols != d) dx = Mat(x.rows, d);
    for (int i = 0; i < x.rows; ++i) {
        const double* xi = x.row(i);
        const double* dyi = dy.row(i);
        double* dxi = dx.row(i);
        const double m = mu[i];
        const double iv = inv[i];
        double mean_dxhat = 0.0;
        double mean_dxhat_xhat = 0.0;
        for (int j = 0; j < d; ++j) {
            const double xhat = (xi[j] - m) * iv;
            const double dxhat = dyi[j] * gain[j];
            mean_dxhat += dxhat;
            mean_dxhat_xhat += dxhat * xhat;
            dgain[j] += dyi[j] * xhat;
            dbias[j] += dyi[j];
        }
        mean_dxhat /= d;
        mean_dxhat_xhat /= d;
        for (int j = 0; j < d; ++j) {
            const double xhat = (xi[j] - m) * iv;
            dxi[j] = iv * (dyi[j] * gain[j] - mean_dxhat - xhat * mean_dxhat_xhat);
        }
    }
}

void softmax_rows(Mat& m) {
    for (int i = 0; i < m.rows; ++i) {
        double* row = m.row(i);
        double mx = row[0];
        for (int j = 1; j < m.cols; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (int j = 0; j < m.cols; ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
        }
        for (int j = 0; j < m.cols; ++j) row[j] /= sum;
    }
}

}  // namespace

void EmbeddingGrads::init(int v, int d) {
    d_obj_per_view = Mat(v, d);
    d_obj_aggregate.assign(d, 0.0);
    d_cat_per_view = Mat(v, d);
    d_cat_aggregate.assign(d, 0.0);
}

DualEmbedding encode(const ParamSet& params, const Mat& features, bool train_mode, Rng& rng,
                     EncodeCache* cache) {
    const auto& cfg = params.config;
    const int v = features.rows;
    const int f = cfg.input_dim;
    const int d = cfg.embed_dim;
    const int h = d;  // trunk width
    const int n_heads = cfg.n_heads;
    const int dh = d / n_heads;

    if (v < 1) throw ConfigError("encode: need at least one view");
    if (features.cols != f)
        throw ConfigError("encode: feature dim " + std::to_string(features.cols) +
                          " does not match encoder input_dim " + std::to_string(f));

    EncodeCache local;
    EncodeCache& c = cache ? *cache : local;
    c.x = features;

    // Trunk: one trainable projection standing in for a feature backbone.
    c.t_pre = Mat(v, h);
    linear(features.a.data(), params.values.data() + params.layout.trunk_w,
           params.values.data() + params.layout.trunk_b, v, f, h, c.t_pre.a.data());
    c.t = c.t_pre;
    for (double& x : c.t.a) x = std::max(0.0, x);

    DualEmbedding out;
    const double p_drop = cfg.dropout_rate;

    for (int s = 0; s < 2; ++s) {
        const auto& so = params.layout.spaces[s];
        SpaceCache& sc = c.spaces[s];

        sc.z0 = Mat(v, d);
        linear(c.t.a.data(), params.values.data() + so.in_w, params.values.data() + so.in_b, v,
               h, d, sc.z0.a.data());

        sc.layers.assign(cfg.n_attention_layers, LayerCache{});
        const Mat* z = &sc.z0;
        for (int l = 0; l < cfg.n_attention_layers; ++l) {
            const auto& lo = so.layers[l];
            LayerCache& lc = sc.layers[l];
            lc.z = *z;

            lc.q = Mat(v, d);
            lc.k = Mat(v, d);
            lc.v = Mat(v, d);
            linear(lc.z.a.data(), params.values.data() + lo.wq, nullptr, v, d, d, lc.q.a.data());
            linear(lc.z.a.data(), params.values.data() + lo.wk, nullptr, v, d, d, lc.k.a.data());
            linear(lc.z.a.data(), params.values.data() + lo.wv, nullptr, v, d, d, lc.v.a.data());

            lc.attn.assign(n_heads, Mat());
            if (train_mode && p_drop > 0.0) lc.drop.assign(n_heads, Mat());
            lc.heads_concat = Mat(v, d);
            const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
            for (int head = 0; head < n_heads; ++head) {
                const int off = head * dh;
                Mat& a = lc.attn[head];
                a = Mat(v, v);
                for (int i = 0; i < v; ++i) {
                    const double* qi = lc.q.row(i) + off;
                    for (int j = 0; j < v; ++j) {
                        const double* kj = lc.k.row(j) + off;
                        double dot = 0.0;
                        for (int t = 0; t < dh; ++t) dot += qi[t] * kj[t];
                        a(i, j) = dot * scale;
                    }
                }
                softmax_rows(a);

                Mat applied = a;
                if (train_mode && p_drop > 0.0) {
                    Mat& e = lc.drop[head];
                    e = Mat(v, v);
                    const double keep = 1.0 / (1.0 - p_drop);
                    for (double& x : e.a) x = rng.uniform() >= p_drop ? keep : 0.0;
                    for (size_t i = 0; i < a.a.size(); ++i) applied.a[i] = a.a[i] * e.a[i];
                }
                for (int i = 0; i < v; ++i) {
                    double* dst = lc.heads_concat.row(i) + off;
                    for (int j = 0; j < v; ++j) {
                        const double w = applied(i, j);
                        if (w == 0.0) continue;
                        const double* vj = lc.v.row(j) + off;
                        for (int t = 0; t < dh; ++t) dst[t] += w * vj[t];
                    }
                }
            }

            Mat attn_out(v, d);
            linear(lc.heads_concat.a.data(), params.values.data() + lo.wo, nullptr, v, d, d,
                   attn_out.a.data());
            lc.r1 = lc.z;
            for (size_t i = 0; i < lc.r1.a.size(); ++i) lc.r1.a[i] += attn_out.a[i];

            layer_norm(lc.r1, params.values.data() + lo.ln1_g, params.values.data() + lo.ln1_b,
                       lc.n1, lc.mu1, lc.inv1);

            lc.ff_pre = Mat(v, d);
            linear(lc.n1.a.data(), params.values.data() + lo.ff_w,
                   params.values.data() + lo.ff_b, v, d, d, lc.ff_pre.a.data());
            lc.ff = lc.ff_pre;
            for (double& x : lc.ff.a) x = std::max(0.0, x);

            lc.r2 = lc.n1;
            for (size_t i = 0; i < lc.r2.a.size(); ++i) lc.r2.a[i] += lc.ff.a[i];

            layer_norm(lc.r2, params.values.data() + lo.ln2_g, params.values.data() + lo.ln2_b,
                       lc.out, lc.mu2, lc.inv2);
            z = &lc.out;
        }

        Mat& per_view = s == 0 ? out.obj_per_view : out.cat_per_view;
        std::vector<double>& agg = s == 0 ? out.obj_aggregate : out.cat_aggregate;
        per_view = *z;
        agg.assign(d, 0.0);
        for (int i = 0; i < v; ++i) {
            const double* row = per_view.row(i);
            for (int j = 0; j < d; ++j) agg[j] += row[j];
        }
        for (int j = 0; j < d; ++j) agg[j] /= v;
    }
    return out;
}

DualEmbedding encode_eval(const ParamSet& params, const Mat& features, EncodeCache* cache) {
    Rng unused(0);
    return encode(params, features, false, unused, cache);
}

std::pair<std::vector<double>, std::vector<double>> encode_single(
    const ParamSet& params, const std::vector<float>& feature) {
    Mat x(1, static_cast<int>(feature.size()));
    for (size_t i = 0; i < feature.size(); ++i) x.a[i] = feature[i];
    DualEmbedding e = encode_eval(params, x);
    std::vector<double> obj(e.obj_per_view.row(0), e.obj_per_view.row(0) + e.obj_per_view.cols);
    std::vector<double> cat(e.cat_per_view.row(0), e.cat_per_view.row(0) + e.cat_per_view.cols);
    return {std::move(obj), std::move(cat)};
}

void encode_backward(const ParamSet& params, const EncodeCache& cache,
                     const EmbeddingGrads& emb_grads, std::vector<double>& grads) {
    const auto& cfg = params.config;
    const int v = cache.x.rows;
    const int f = cfg.input_dim;
    const int d = cfg.embed_dim;
    const int h = d;
    const int n_heads = cfg.n_heads;
    const int dh = d / n_heads;

    if (grads.size() != params.layout.total)
        throw ConfigError("encode_backward: gradient buffer has wrong size");

    Mat d_trunk(v, h);  // accumulated dL/d(trunk output)

    for (int s = 0; s < 2; ++s) {
        const auto& so = params.layout.spaces[s];
        const SpaceCache& sc = cache.spaces[s];
        const Mat& d_per_view = s == 0 ? emb_grads.d_obj_per_view : emb_grads.d_cat_per_view;
        const std::vector<double>& d_agg =
            s == 0 ? emb_grads.d_obj_aggregate : emb_grads.d_cat_aggregate;

        // dL/d(last layer output): per-view grads plus the mean-aggregate fanout.
        Mat dz(v, d);
        for (int i = 0; i < v; ++i) {
            double* dzi = dz.row(i);
            const double* dpv = d_per_view.row(i);
            for (int j = 0; j < d; ++j) dzi[j] = dpv[j] + d_agg[j] / v;
        }

        for (int l = cfg.n_attention_layers - 1; l >= 0; --l) {
            const auto& lo = so.layers[l];
            const LayerCache& lc = sc.layers[l];

            // LN2
            Mat dr2;
            layer_norm_backward(lc.r2, params.values.data() + lo.ln2_g, lc.mu2, lc.inv2, dz, dr2,
                                grads.data() + lo.ln2_g, grads.data() + lo.ln2_b);

            // r2 = n1 + relu(ff_pre)
            Mat dn1 = dr2;
            Mat dff_pre(v, d);
            for (size_t i = 0; i < dff_pre.a.size(); ++i)
                dff_pre.a[i] = lc.ff_pre.a[i] > 0.0 ? dr2.a[i] : 0.0;
            linear_backward(lc.n1.a.data(), params.values.data() + lo.ff_w, dff_pre.a.data(), v,
                            d, d, grads.data() + lo.ff_w, grads.data() + lo.ff_b, dn1.a.data());

            // LN1
            Mat dr1;
            layer_norm_backward(lc.r1, params.values.data() + lo.ln1_g, lc.mu1, lc.inv1, dn1, dr1,
                                grads.data() + lo.ln1_g, grads.data() + lo.ln1_b);

            // r1 = z + heads_concat * wo
            Mat dz_prev = dr1;
            Mat dconcat(v, d);
            linear_backward(lc.heads_concat.a.data(), params.values.data() + lo.wo,
                            dr1.a.data(), v, d, d, grads.data() + lo.wo, nullptr,
                            dconcat.a.data());

            Mat dq(v, d), dk(v, d), dv(v, d);
            const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
            for (int head = 0; head < n_heads; ++head) {
                const int off = head * dh;
                const Mat& a = lc.attn[head];
                const bool dropped = !lc.drop.empty();

                // dL/d(dropped attention weights)
                Mat da(v, v);
                for (int i = 0; i < v; ++i) {
                    const double* dci = dconcat.row(i) + off;
                    for (int j = 0; j < v; ++j) {
                        const double* vj = lc.v.row(j) + off;
                        double s2 = 0.0;
                        for (int t = 0; t < dh; ++t) s2 += dci[t] * vj[t];
                        da(i, j) = s2;
                    }
                }
                // dV accumulation uses the applied (possibly dropped) weights.
                for (int j = 0; j < v; ++j) {
                    double* dvj = dv.row(j) + off;
                    for (int i = 0; i < v; ++i) {
                        double w = a(i, j);
                        if (dropped) w *= lc.drop[head](i, j);
                        if (w == 0.0) continue;
                        const double* dci = dconcat.row(i) + off;
                        for (int t = 0; t < dh; ++t) dvj[t] += w * dci[t];
                    }
                }
                if (dropped)
                    for (size_t i = 0; i < da.a.size(); ++i) da.a[i] *= lc.drop[head].a[i];

                // Softmax backward, then the 1/sqrt(dh) score scaling.
                for (int i = 0; i < v; ++i) {
                    const double* ai = a.row(i);
                    double* dai = da.row(i);
                    double dot = 0.0;
                    for (int j = 0; j < v; ++j) dot += dai[j] * ai[j];
                    for (int j = 0; j < v; ++j) dai[j] = ai[j] * (dai[j] - dot) * scale;
                }

                for (int i = 0; i < v; ++i) {
                    const double* dsi = da.row(i);
                    double* dqi = dq.row(i) + off;
                    for (int j = 0; j < v; ++j) {
                        const double ds = dsi[j];
                        if (ds == 0.0) continue;
                        const double* kj = lc.k.row(j) + off;
                        for (int t = 0; t < dh; ++t) dqi[t] += ds * kj[t];
                    }
                }
                for (int j = 0; j < v; ++j) {
                    double* dkj = dk.row(j) + off;
                    for (int i = 0; i < v; ++i) {
                        const double ds = da(i, j);
                        if (ds == 0.0) continue;
                        const double* qi = lc.q.row(i) + off;
                        for (int t = 0; t < dh; ++t) dkj[t] += ds * qi[t];
                    }
                }
            }

            linear_backward(lc.z.a.data(), params.values.data() + lo.wq, dq.a.data(), v, d, d,
                            grads.data() + lo.wq, nullptr, dz_prev.a.data());
            linear_backward(lc.z.a.data(), params.values.data() + lo.wk, dk.a.data(), v, d, d,
                            grads.data() + lo.wk, nullptr, dz_prev.a.data());
            linear_backward(lc.z.a.data(), params.values.data() + lo.wv, dv.a.data(), v, d, d,
                            grads.data() + lo.wv, nullptr, dz_prev.a.data());
            dz = std::move(dz_prev);
        }

        // Input projection back to the trunk.
        linear_backward(cache.t.a.data(), params.values.data() + so.in_w, dz.a.data(), v, h, d,
                        grads.data() + so.in_w, grads.data() + so.in_b, d_trunk.a.data());
    }

    // Trunk ReLU + projection.
    Mat dt_pre(v, h);
    for (size_t i = 0; i < dt_pre.a.size(); ++i)
        dt_pre.a[i] = cache.t_pre.a[i] > 0.0 ? d_trunk.a[i] : 0.0;
    linear_backward(cache.x.a.data(), params.values.data() + params.layout.trunk_w,
                    dt_pre.a.data(), v, f, h, grads.data() + params.layout.trunk_w,
                    grads.data() + params.layout.trunk_b, nullptr);
}

namespace {

void put_u32(std::string& buf, uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& buf, uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& buf, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(buf, bits);
}

struct CkptReader {
    const std::string& data;
    const std::string& path;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > data.size())
            throw IoError(IoError::Kind::Truncated, "checkpoint truncated: " + path);
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(data[pos + i]);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(data[pos + i]);
        pos += 8;
        return v;
    }
    float f32() {
        const uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
};

}  // namespace

void save_checkpoint(const std::string& path, const ParamSet& params) {
    std::string buf;
    buf.reserve(32 + params.values.size() * 4);
    buf += "OWSP";
    put_u32(buf, kCheckpointVersion);
    put_u32(buf, static_cast<uint32_t>(params.config.input_dim));
    put_u32(buf, static_cast<uint32_t>(params.config.embed_dim));
    put_u32(buf, static_cast<uint32_t>(params.config.n_attention_layers));
    put_u32(buf, static_cast<uint32_t>(params.config.n_heads));
    put_f32(buf, static_cast<float>(params.config.dropout_rate));
    put_u64(buf, params.config.seed);
    for (double x : params.values) put_f32(buf, static_cast<float>(x));

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError(IoError::Kind::OpenFailed, "cannot open for writing: " + path);
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) throw IoError(IoError::Kind::WriteFailed, "write failed: " + path);
}

ParamSet load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError(IoError::Kind::OpenFailed, "cannot open: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    const std::string data = ss.str();
    if (data.size() < 4 || data.compare(0, 4, "OWSP") != 0)
        throw IoError(IoError::Kind::BadMagic, "not a checkpoint file (bad magic): " + path);

    CkptReader r{data, path, 4};
    const uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw IoError(IoError::Kind::BadVersion,
                      "unsupported checkpoint version " + std::to_string(version) + ": " + path);
    EncoderConfig cfg;
    cfg.input_dim = static_cast<int>(r.u32());
    cfg.embed_dim = static_cast<int>(r.u32());
    cfg.n_attention_layers = static_cast<int>(r.u32());
    cfg.n_heads = static_cast<int>(r.u32());
    cfg.dropout_rate = r.f32();
    cfg.seed = r.u64();
    cfg.validate();

    ParamSet p;
    p.config = cfg;
    p.layout = ParamLayout(cfg);
    p.values.resize(p.layout.total);
    for (double& x : p.values) x = r.f32();
    if (r.pos != data.size())
        throw IoError(IoError::Kind::Truncated, "trailing bytes in checkpoint: " + path);
    return p;
}

}  // namespace owsc
