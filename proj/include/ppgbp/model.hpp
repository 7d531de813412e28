#pragma once

#include "ppgbp/errors.hpp"
#include "ppgbp/features.hpp"
#include "ppgbp/nn.hpp"
#include "ppgbp/rng.hpp"

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace ppgbp {

enum class ModelVariant { Baseline, Ppg, Hybrid };
enum class HeadKind { Regression2, BinaryLogit };

inline const char* variant_to_string(ModelVariant v) {
    switch (v) {
        case ModelVariant::Baseline: return "baseline";
        case ModelVariant::Ppg: return "ppg";
        case ModelVariant::Hybrid: return "hybrid";
    }
    return "ppg";
}

inline ModelVariant variant_from_string(const std::string& s) {
    if (s == "baseline") return ModelVariant::Baseline;
    if (s == "ppg") return ModelVariant::Ppg;
    if (s == "hybrid") return ModelVariant::Hybrid;
    throw ParseError("unknown model variant: " + s);
}

inline const char* head_to_string(HeadKind h) {
    return h == HeadKind::Regression2 ? "regression2" : "binary_logit";
}

inline HeadKind head_from_string(const std::string& s) {
    if (s == "regression2") return HeadKind::Regression2;
    if (s == "binary_logit") return HeadKind::BinaryLogit;
    throw ParseError("unknown head kind: " + s);
}

// Architecture of the two-branch network. The defaults reproduce the
// published dimensions: a five-layer 1D CNN whose 512-sample input pools
// down to a 128x32 feature map, a depth-2 transformer encoder over the 32
// tokens (8 heads, 512-dim feed-forward) yielding a 128-dim pulse embedding,
// a 37->64->64 baseline MLP, and a 192-dim fused vector for the hybrid head.
struct ModelConfig {
    std::vector<std::size_t> conv_kernels{7, 5, 3, 3, 3};
    std::vector<std::size_t> conv_channels{16, 32, 64, 128, 128};
    std::vector<std::size_t> pool_after_layers{1, 2, 3, 4}; // 1-based layer index
    std::size_t vit_heads = 8;
    std::size_t vit_ff_dim = 512;
    std::size_t vit_depth = 2;
    std::size_t ppg_embed_dim = 128;
    std::vector<std::size_t> baseline_hidden{64};
    std::size_t baseline_out = 64;
    std::size_t fusion_dim = 192;
    HeadKind head = HeadKind::Regression2;
    ModelVariant variant = ModelVariant::Hybrid;

    std::size_t input_len = 512;
    std::size_t input_channels = 5;

    std::size_t token_count() const {
        std::size_t len = input_len;
        for (std::size_t i = 0; i < conv_kernels.size(); ++i)
            if (std::find(pool_after_layers.begin(), pool_after_layers.end(), i + 1) !=
                pool_after_layers.end())
                len /= 2;
        return len;
    }

    std::size_t head_input_dim() const {
        switch (variant) {
            case ModelVariant::Baseline: return baseline_out;
            case ModelVariant::Ppg: return ppg_embed_dim;
            case ModelVariant::Hybrid: return fusion_dim;
        }
        return ppg_embed_dim;
    }

    std::size_t output_dim() const { return head == HeadKind::Regression2 ? 2 : 1; }

    void validate() const {
        if (conv_kernels.size() != conv_channels.size())
            throw ShapeMismatch("model config: kernel/channel count mismatch");
        if (conv_channels.empty() || conv_channels.back() != ppg_embed_dim)
            throw ShapeMismatch("model config: CNN output channels must equal ppg_embed_dim");
        if (ppg_embed_dim % vit_heads != 0)
            throw ShapeMismatch("model config: embed dim not divisible by heads");
        if (variant == ModelVariant::Hybrid && fusion_dim != ppg_embed_dim + baseline_out)
            throw ShapeMismatch("model config: fusion_dim must be ppg_embed_dim + baseline_out");
    }

    // Half-size configuration for gradient checking (tractable finite
    // differences, same layer types).
    static ModelConfig reduced(ModelVariant variant, HeadKind head) {
        ModelConfig c;
        c.conv_channels = {8, 16, 32, 64, 64};
        c.vit_heads = 8;
        c.vit_ff_dim = 64;
        c.vit_depth = 1;
        c.ppg_embed_dim = 64;
        c.baseline_hidden = {16};
        c.baseline_out = 16;
        c.fusion_dim = 80;
        c.variant = variant;
        c.head = head;
        return c;
    }
};

// One pre-norm transformer encoder block: x + MHSA(LN(x)), then
// x + FF(LN(x)) with a ReLU between the two feed-forward layers.
class EncoderBlock {
public:
    EncoderBlock(nn::ParamStore& ps, const std::string& name, std::size_t dim,
                 std::size_t heads, std::size_t ff_dim, Rng& rng)
        : ln1_(ps, name + ".ln1", dim),
          attn_(ps, name + ".attn", dim, heads, rng),
          ln2_(ps, name + ".ln2", dim),
          ff1_(ps, name + ".ff1", dim, ff_dim, rng),
          ff2_(ps, name + ".ff2", ff_dim, dim, rng) {}

    std::vector<double> forward(const std::vector<double>& x, std::size_t n, std::size_t t) {
        const std::size_t rows = n * t;
        auto h = ln1_.forward(x, rows);
        auto a = attn_.forward(h, n, t);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += x[i];
        auto h2 = ln2_.forward(a, rows);
        auto f = ff2_.forward(relu_.forward(ff1_.forward(h2, rows)), rows);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] += a[i];
        return f;
    }

    std::vector<double> backward(const std::vector<double>& dy, std::size_t n, std::size_t t) {
        const std::size_t rows = n * t;
        auto dh2 = ff1_.backward(relu_.backward(ff2_.backward(dy)));
        auto da = ln2_.backward(dh2);
        for (std::size_t i = 0; i < da.size(); ++i) da[i] += dy[i];
        auto dh = attn_.backward(da);
        auto dx = ln1_.backward(dh);
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += da[i];
        return dx;
    }

    const nn::MultiHeadAttention& attn() const { return attn_; }

private:
    nn::LayerNorm ln1_;
    nn::MultiHeadAttention attn_;
    nn::LayerNorm ln2_;
    nn::Linear ff1_, ff2_;
    nn::Relu relu_;
};

// The full two-branch model. Owns every parameter via its ParamStore.
class Model {
public:
    Model(const ModelConfig& config, std::uint64_t seed) : config_(config), seed_(seed) {
        config_.validate();
        Rng rng(seed);
        if (config_.variant != ModelVariant::Baseline) {
            std::size_t cin = config_.input_channels;
            for (std::size_t i = 0; i < config_.conv_kernels.size(); ++i) {
                conv_.emplace_back(params_, "cnn.conv" + std::to_string(i + 1), cin,
                                   config_.conv_channels[i], config_.conv_kernels[i], rng);
                bn_.emplace_back(params_, "cnn.bn" + std::to_string(i + 1),
                                 config_.conv_channels[i]);
                cin = config_.conv_channels[i];
            }
            conv_relu_.resize(conv_.size());
            pool_.resize(conv_.size());

            const std::size_t t = config_.token_count();
            pos_embed_ = params_.add("vit.pos_embed", {t, config_.ppg_embed_dim});
            for (auto& v : pos_embed_->v) v = rng.normal(0.0, 0.02);
            for (std::size_t d = 0; d < config_.vit_depth; ++d)
                blocks_.push_back(std::make_unique<EncoderBlock>(
                    params_, "vit.block" + std::to_string(d + 1), config_.ppg_embed_dim,
                    config_.vit_heads, config_.vit_ff_dim, rng));
            embed_proj_ = nn::Linear(params_, "vit.proj", config_.ppg_embed_dim,
                                     config_.ppg_embed_dim, rng);
        }
        if (config_.variant != ModelVariant::Ppg) {
            std::size_t in = kFeatureCount;
            std::size_t li = 0;
            for (std::size_t h : config_.baseline_hidden) {
                base_layers_.emplace_back(params_, "baseline.fc" + std::to_string(++li), in, h,
                                          rng);
                in = h;
            }
            base_layers_.emplace_back(params_, "baseline.fc" + std::to_string(++li), in,
                                      config_.baseline_out, rng);
            base_relu_.resize(base_layers_.size());
        }
        if (config_.variant == ModelVariant::Baseline) {
            head_out_ = nn::Linear(params_, "head.out", config_.head_input_dim(),
                                   config_.output_dim(), rng);
            head_has_hidden_ = false;
        } else {
            head_fc_ = nn::Linear(params_, "head.fc", config_.head_input_dim(), 64, rng);
            head_out_ = nn::Linear(params_, "head.out", 64, config_.output_dim(), rng);
            head_has_hidden_ = true;
        }
        // de-standardization constants for regression outputs (set by train)
        out_mean_ = params_.add("output.mean", {config_.output_dim()}, false);
        out_sd_ = params_.add("output.sd", {config_.output_dim()}, false);
        std::fill(out_sd_->v.begin(), out_sd_->v.end(), 1.0);
    }

    const ModelConfig& config() const { return config_; }
    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }
    std::uint64_t seed() const { return seed_; }

    // CNN branch: [n, 5, 512] -> [n, 128, 32]
    std::vector<double> cnn_branch(const std::vector<double>& x, std::size_t n, bool train,
                                   bool update_running = true) {
        if (x.size() != n * config_.input_channels * config_.input_len)
            throw ShapeMismatch("cnn_branch: bad input size");
        std::vector<double> h = x;
        std::size_t len = config_.input_len;
        for (std::size_t i = 0; i < conv_.size(); ++i) {
            h = conv_[i].forward(h, n, len);
            h = bn_[i].forward(h, n, len, train, update_running);
            h = conv_relu_[i].forward(h);
            if (std::find(config_.pool_after_layers.begin(), config_.pool_after_layers.end(),
                          i + 1) != config_.pool_after_layers.end()) {
                h = pool_[i].forward(h, n * config_.conv_channels[i], len);
                len /= 2;
            }
        }
        cnn_out_len_ = len;
        nn::check_finite(h, "cnn_branch");
        return h;
    }

    std::vector<double> cnn_branch_backward(const std::vector<double>& dy, std::size_t n) {
        std::vector<double> d = dy;
        for (std::size_t ri = conv_.size(); ri-- > 0;) {
            if (std::find(config_.pool_after_layers.begin(), config_.pool_after_layers.end(),
                          ri + 1) != config_.pool_after_layers.end())
                d = pool_[ri].backward(d);
            d = conv_relu_[ri].backward(d);
            d = bn_[ri].backward(d);
            d = conv_[ri].backward(d);
        }
        return d;
    }

    // ViT branch: [n, 128, 32] feature map -> [n, 128] embedding.
    std::vector<double> vit_encoder(const std::vector<double>& feat, std::size_t n) {
        const std::size_t t = config_.token_count();
        const std::size_t d = config_.ppg_embed_dim;
        if (feat.size() != n * d * t) throw ShapeMismatch("vit_encoder: bad input size");
        // transpose [n, d, t] -> tokens [n, t, d], add positional embeddings
        std::vector<double> tok(n * t * d);
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t i = 0; i < t; ++i)
                for (std::size_t c = 0; c < d; ++c)
                    tok[(b * t + i) * d + c] = feat[(b * d + c) * t + i] + pos_embed_->v[i * d + c];
        for (auto& blk : blocks_) tok = blk->forward(tok, n, t);
        // mean pool over tokens
        std::vector<double> pooled(n * d, 0.0);
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t i = 0; i < t; ++i)
                for (std::size_t c = 0; c < d; ++c) pooled[b * d + c] += tok[(b * t + i) * d + c];
        const double inv_t = 1.0 / static_cast<double>(t);
        for (auto& v : pooled) v *= inv_t;
        auto out = embed_proj_.forward(pooled, n);
        nn::check_finite(out, "vit_encoder");
        return out;
    }

    std::vector<double> vit_encoder_backward(const std::vector<double>& dy, std::size_t n) {
        const std::size_t t = config_.token_count();
        const std::size_t d = config_.ppg_embed_dim;
        auto dpooled = embed_proj_.backward(dy);
        const double inv_t = 1.0 / static_cast<double>(t);
        std::vector<double> dtok(n * t * d);
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t i = 0; i < t; ++i)
                for (std::size_t c = 0; c < d; ++c)
                    dtok[(b * t + i) * d + c] = dpooled[b * d + c] * inv_t;
        for (std::size_t ri = blocks_.size(); ri-- > 0;) dtok = blocks_[ri]->backward(dtok, n, t);
        std::vector<double> dfeat(n * d * t);
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t i = 0; i < t; ++i)
                for (std::size_t c = 0; c < d; ++c) {
                    const double g = dtok[(b * t + i) * d + c];
                    dfeat[(b * d + c) * t + i] = g;
                    pos_embed_->g[i * d + c] += g;
                }
        return dfeat;
    }

    // Baseline branch: [n, 37] -> [n, 64]
    std::vector<double> baseline_branch(const std::vector<double>& v, std::size_t n) {
        if (v.size() != n * kFeatureCount) throw ShapeMismatch("baseline_branch: bad input size");
        std::vector<double> h = v;
        for (std::size_t i = 0; i < base_layers_.size(); ++i) {
            h = base_layers_[i].forward(h, n);
            if (i + 1 < base_layers_.size()) h = base_relu_[i].forward(h);
        }
        nn::check_finite(h, "baseline_branch");
        return h;
    }

    std::vector<double> baseline_branch_backward(const std::vector<double>& dy) {
        std::vector<double> d = dy;
        for (std::size_t ri = base_layers_.size(); ri-- > 0;) {
            if (ri + 1 < base_layers_.size()) d = base_relu_[ri].backward(d);
            d = base_layers_[ri].backward(d);
        }
        return d;
    }

    // Full forward. windows: [n, 5, 512] (empty for Baseline); features:
    // [n, 37] (empty for Ppg). Returns [n, output_dim] in mm Hg for
    // regression, pre-sigmoid logits for classification.
    std::vector<double> forward(const std::vector<double>& windows,
                                const std::vector<double>& features, std::size_t n, bool train,
                                bool update_running = true) {
        const bool wants_ppg = config_.variant != ModelVariant::Baseline;
        const bool wants_base = config_.variant != ModelVariant::Ppg;
        if (wants_ppg == windows.empty())
            throw VariantInputMismatch("forward: window input does not match variant");
        if (wants_base == features.empty())
            throw VariantInputMismatch("forward: feature input does not match variant");
        // a non-finite input can be flushed to zero by ReLU after batch-norm,
        // so inputs are validated here rather than only at branch exits
        nn::check_finite(windows, "model input windows");
        nn::check_finite(features, "model input features");

        std::vector<double> fused;
        if (config_.variant == ModelVariant::Ppg) {
            fused = vit_encoder(cnn_branch(windows, n, train, update_running), n);
        } else if (config_.variant == ModelVariant::Baseline) {
            fused = baseline_branch(features, n);
        } else {
            auto ppg = vit_encoder(cnn_branch(windows, n, train, update_running), n);
            auto base = baseline_branch(features, n);
            const std::size_t dp = config_.ppg_embed_dim, db = config_.baseline_out;
            fused.resize(n * (dp + db));
            for (std::size_t b = 0; b < n; ++b) {
                std::copy(ppg.begin() + b * dp, ppg.begin() + (b + 1) * dp,
                          fused.begin() + b * (dp + db));
                std::copy(base.begin() + b * db, base.begin() + (b + 1) * db,
                          fused.begin() + b * (dp + db) + dp);
            }
        }

        std::vector<double> raw;
        if (head_has_hidden_)
            raw = head_out_.forward(head_relu_.forward(head_fc_.forward(fused, n)), n);
        else
            raw = head_out_.forward(fused, n);

        const std::size_t od = config_.output_dim();
        std::vector<double> out(raw.size());
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t o = 0; o < od; ++o)
                out[b * od + o] = raw[b * od + o] * out_sd_->v[o] + out_mean_->v[o];
        nn::check_finite(out, "model head");
        return out;
    }

    // Backward from d(out); chains the de-standardization, head, fusion and
    // both branches. Gradients accumulate into the param store.
    void backward(const std::vector<double>& dout, std::size_t n) {
        const std::size_t od = config_.output_dim();
        std::vector<double> draw(dout.size());
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t o = 0; o < od; ++o) draw[b * od + o] = dout[b * od + o] * out_sd_->v[o];

        std::vector<double> dfused;
        if (head_has_hidden_)
            dfused = head_fc_.backward(head_relu_.backward(head_out_.backward(draw)));
        else
            dfused = head_out_.backward(draw);

        if (config_.variant == ModelVariant::Ppg) {
            cnn_branch_backward(vit_encoder_backward(dfused, n), n);
        } else if (config_.variant == ModelVariant::Baseline) {
            baseline_branch_backward(dfused);
        } else {
            const std::size_t dp = config_.ppg_embed_dim, db = config_.baseline_out;
            std::vector<double> dppg(n * dp), dbase(n * db);
            for (std::size_t b = 0; b < n; ++b) {
                std::copy(dfused.begin() + b * (dp + db), dfused.begin() + b * (dp + db) + dp,
                          dppg.begin() + b * dp);
                std::copy(dfused.begin() + b * (dp + db) + dp,
                          dfused.begin() + (b + 1) * (dp + db), dbase.begin() + b * db);
            }
            cnn_branch_backward(vit_encoder_backward(dppg, n), n);
            baseline_branch_backward(dbase);
        }
    }

    void set_output_affine(const std::vector<double>& mean, const std::vector<double>& sd) {
        out_mean_->v = mean;
        out_sd_->v = sd;
    }
    const std::vector<double>& output_mean() const { return out_mean_->v; }
    const std::vector<double>& output_sd() const { return out_sd_->v; }

    const std::vector<std::unique_ptr<EncoderBlock>>& encoder_blocks() const { return blocks_; }

private:
    ModelConfig config_;
    std::uint64_t seed_ = 0;
    nn::ParamStore params_;

    std::vector<nn::Conv1d> conv_;
    std::vector<nn::BatchNorm1d> bn_;
    std::vector<nn::Relu> conv_relu_;
    std::vector<nn::AvgPool1d> pool_;
    nn::Param* pos_embed_ = nullptr;
    std::vector<std::unique_ptr<EncoderBlock>> blocks_;
    nn::Linear embed_proj_;

    std::vector<nn::Linear> base_layers_;
    std::vector<nn::Relu> base_relu_;

    nn::Linear head_fc_, head_out_;
    nn::Relu head_relu_;
    bool head_has_hidden_ = true;

    nn::Param* out_mean_ = nullptr;
    nn::Param* out_sd_ = nullptr;

    std::size_t cnn_out_len_ = 0;
};

// Mean-squared-error loss; returns loss and writes d(loss)/d(pred).
inline double mse_loss(const std::vector<double>& pred, const std::vector<double>& target,
                       std::vector<double>& dpred) {
    if (pred.size() != target.size()) throw ShapeMismatch("mse_loss: size mismatch");
    dpred.assign(pred.size(), 0.0);
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        loss += d * d * inv_n;
        dpred[i] = 2.0 * d * inv_n;
    }
    return loss;
}

// Binary cross-entropy on logits; targets in {0, 1}.
inline double bce_loss(const std::vector<double>& logits, const std::vector<double>& target,
                       std::vector<double>& dlogits) {
    if (logits.size() != target.size()) throw ShapeMismatch("bce_loss: size mismatch");
    dlogits.assign(logits.size(), 0.0);
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double z = logits[i];
        // log(1 + exp(-|z|)) + max(z, 0) - z*t, numerically stable
        loss += inv_n * (std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0) - z * target[i]);
        const double s = 1.0 / (1.0 + std::exp(-z));
        dlogits[i] = inv_n * (s - target[i]);
    }
    return loss;
}

} // namespace ppgbp
