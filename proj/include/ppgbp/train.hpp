#pragma once

#include "ppgbp/errors.hpp"
#include "ppgbp/model.hpp"
#include "ppgbp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace ppgbp {

// One model input: a five-beat window plus its session's metadata.
struct Sample {
    std::string session_id;
    std::string subject_id;
    std::vector<double> window;   // 5*512, row-major channels
    FeatureVector features{};
    double sbp = 0.0;
    double dbp = 0.0;
};

struct TrainConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0; // decoupled (AdamW-style)
    std::size_t batch_size = 32;
    std::size_t epochs = 30;
    double train_fraction = 0.8; // subject-level split
    std::uint64_t seed = 1;
    double class_threshold = 130.0; // mm Hg, SBP binary task
};

struct EpochStats {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    std::vector<EpochStats> history;
    std::vector<std::string> train_subjects;
    std::vector<std::string> val_subjects;
};

class Adam {
public:
    Adam(nn::ParamStore& params, const TrainConfig& cfg) : params_(params), cfg_(cfg) {
        for (const auto& p : params.all()) {
            m_.emplace_back(p->size(), 0.0);
            v_.emplace_back(p->size(), 0.0);
        }
    }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        const auto& ps = params_.all();
        for (std::size_t i = 0; i < ps.size(); ++i) {
            auto& p = *ps[i];
            if (!p.trainable) continue;
            for (std::size_t j = 0; j < p.size(); ++j) {
                m_[i][j] = cfg_.beta1 * m_[i][j] + (1.0 - cfg_.beta1) * p.g[j];
                v_[i][j] = cfg_.beta2 * v_[i][j] + (1.0 - cfg_.beta2) * p.g[j] * p.g[j];
                const double mhat = m_[i][j] / bc1;
                const double vhat = v_[i][j] / bc2;
                p.v[j] -= cfg_.lr * (mhat / (std::sqrt(vhat) + cfg_.eps) +
                                     cfg_.weight_decay * p.v[j]);
            }
        }
    }

private:
    nn::ParamStore& params_;
    TrainConfig cfg_;
    std::vector<std::vector<double>> m_, v_;
    std::size_t t_ = 0;
};

namespace detail {

inline void gather_batch(const std::vector<Sample>& data, const std::vector<std::size_t>& idx,
                         std::size_t lo, std::size_t hi, const ModelConfig& mc,
                         std::vector<double>& windows, std::vector<double>& feats) {
    const std::size_t n = hi - lo;
    windows.clear();
    feats.clear();
    if (mc.variant != ModelVariant::Baseline)
        windows.reserve(n * mc.input_channels * mc.input_len);
    if (mc.variant != ModelVariant::Ppg) feats.reserve(n * kFeatureCount);
    for (std::size_t k = lo; k < hi; ++k) {
        const Sample& s = data[idx[k]];
        if (mc.variant != ModelVariant::Baseline)
            windows.insert(windows.end(), s.window.begin(), s.window.end());
        if (mc.variant != ModelVariant::Ppg)
            feats.insert(feats.end(), s.features.begin(), s.features.end());
    }
}

inline std::vector<double> gather_targets(const std::vector<Sample>& data,
                                          const std::vector<std::size_t>& idx, std::size_t lo,
                                          std::size_t hi, const Model& model,
                                          const TrainConfig& tc) {
    std::vector<double> t;
    const auto& mc = model.config();
    for (std::size_t k = lo; k < hi; ++k) {
        const Sample& s = data[idx[k]];
        if (mc.head == HeadKind::Regression2) {
            // standardized targets; the model de-standardizes its outputs
            t.push_back((s.sbp - model.output_mean()[0]) / model.output_sd()[0]);
            t.push_back((s.dbp - model.output_mean()[1]) / model.output_sd()[1]);
        } else {
            t.push_back(s.sbp >= tc.class_threshold ? 1.0 : 0.0);
        }
    }
    return t;
}

// Loss of a batch with the model's de-standardization folded back out, so
// regression trains in standardized space.
inline double batch_loss(Model& model, const std::vector<double>& windows,
                         const std::vector<double>& feats, const std::vector<double>& targets,
                         std::size_t n, bool train, bool update_running, bool do_backward) {
    auto out = model.forward(windows, feats, n, train, update_running);
    const auto& mc = model.config();
    const std::size_t od = mc.output_dim();
    std::vector<double> scaled(out.size());
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t o = 0; o < od; ++o)
            scaled[b * od + o] =
                (out[b * od + o] - model.output_mean()[o]) / model.output_sd()[o];

    std::vector<double> dscaled;
    double loss;
    if (mc.head == HeadKind::Regression2)
        loss = mse_loss(scaled, targets, dscaled);
    else
        loss = bce_loss(scaled, targets, dscaled);

    if (do_backward) {
        std::vector<double> dout(dscaled.size());
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t o = 0; o < od; ++o)
                dout[b * od + o] = dscaled[b * od + o] / model.output_sd()[o];
        model.backward(dout, n);
    }
    return loss;
}

} // namespace detail

// Mini-batch Adam with a subject-level split. Deterministic given the seed:
// fixed init (model seed), fixed split, fixed per-epoch shuffles.
inline TrainResult train(Model& model, const std::vector<Sample>& data, const TrainConfig& tc) {
    const auto& mc = model.config();

    std::set<std::string> uniq;
    for (const auto& s : data) uniq.insert(s.subject_id);
    std::vector<std::string> subjects(uniq.begin(), uniq.end());
    Rng split_rng(tc.seed * 0x9E3779B97F4A7C15ull + 1);
    shuffle(subjects, split_rng);
    const std::size_t n_train =
        static_cast<std::size_t>(std::floor(subjects.size() * tc.train_fraction));
    if (n_train == 0 || n_train == subjects.size())
        throw EmptyPartition("train: a split side has no subjects");
    std::set<std::string> train_set(subjects.begin(), subjects.begin() + n_train);

    TrainResult result;
    result.train_subjects.assign(subjects.begin(), subjects.begin() + n_train);
    result.val_subjects.assign(subjects.begin() + n_train, subjects.end());

    std::vector<std::size_t> train_idx, val_idx;
    for (std::size_t i = 0; i < data.size(); ++i)
        (train_set.count(data[i].subject_id) ? train_idx : val_idx).push_back(i);
    if (train_idx.empty() || val_idx.empty())
        throw EmptyPartition("train: a split side has no windows");

    if (mc.head == HeadKind::Regression2) {
        // standardize regression targets over the training windows
        double ms = 0.0, md = 0.0;
        for (std::size_t i : train_idx) { ms += data[i].sbp; md += data[i].dbp; }
        ms /= train_idx.size(); md /= train_idx.size();
        double vs = 0.0, vd = 0.0;
        for (std::size_t i : train_idx) {
            vs += (data[i].sbp - ms) * (data[i].sbp - ms);
            vd += (data[i].dbp - md) * (data[i].dbp - md);
        }
        vs = std::sqrt(vs / train_idx.size());
        vd = std::sqrt(vd / train_idx.size());
        model.set_output_affine({ms, md}, {std::max(vs, 1e-6), std::max(vd, 1e-6)});
    }

    Adam opt(model.params(), tc);
    Rng shuffle_rng(tc.seed * 0x9E3779B97F4A7C15ull + 2);
    std::vector<double> windows, feats;

    for (std::size_t epoch = 1; epoch <= tc.epochs; ++epoch) {
        shuffle(train_idx, shuffle_rng);
        double train_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t lo = 0; lo < train_idx.size(); lo += tc.batch_size) {
            const std::size_t hi = std::min(lo + tc.batch_size, train_idx.size());
            detail::gather_batch(data, train_idx, lo, hi, mc, windows, feats);
            auto targets = detail::gather_targets(data, train_idx, lo, hi, model, tc);
            model.params().zero_grad();
            train_loss += detail::batch_loss(model, windows, feats, targets, hi - lo, true,
                                             true, true);
            opt.step();
            ++batches;
        }
        train_loss /= static_cast<double>(batches);

        double val_loss = 0.0;
        std::size_t vbatches = 0;
        for (std::size_t lo = 0; lo < val_idx.size(); lo += tc.batch_size) {
            const std::size_t hi = std::min(lo + tc.batch_size, val_idx.size());
            detail::gather_batch(data, val_idx, lo, hi, mc, windows, feats);
            auto targets = detail::gather_targets(data, val_idx, lo, hi, model, tc);
            val_loss += detail::batch_loss(model, windows, feats, targets, hi - lo, false,
                                           false, false);
            ++vbatches;
        }
        val_loss /= static_cast<double>(vbatches);
        result.history.push_back({epoch, train_loss, val_loss});
    }
    return result;
}

struct RegressionPrediction {
    double sbp = 0.0;
    double dbp = 0.0;
};

struct ClassPrediction {
    bool positive = false; // SBP >= threshold
    double probability = 0.0;
};

// Session-level prediction: mean of per-window outputs (regression), or mean
// sigmoid probability thresholded at 0.5 (classification).
inline RegressionPrediction predict_session_regression(Model& model,
                                                       const std::vector<Sample>& windows) {
    if (windows.empty()) throw NoWindows("predict_session: no windows");
    const auto& mc = model.config();
    std::vector<double> w, f;
    for (const auto& s : windows) {
        if (mc.variant != ModelVariant::Baseline)
            w.insert(w.end(), s.window.begin(), s.window.end());
        if (mc.variant != ModelVariant::Ppg)
            f.insert(f.end(), s.features.begin(), s.features.end());
    }
    auto out = model.forward(w, f, windows.size(), false);
    RegressionPrediction p;
    for (std::size_t b = 0; b < windows.size(); ++b) {
        p.sbp += out[b * 2];
        p.dbp += out[b * 2 + 1];
    }
    p.sbp /= static_cast<double>(windows.size());
    p.dbp /= static_cast<double>(windows.size());
    return p;
}

inline ClassPrediction predict_session_class(Model& model, const std::vector<Sample>& windows) {
    if (windows.empty()) throw NoWindows("predict_session: no windows");
    const auto& mc = model.config();
    std::vector<double> w, f;
    for (const auto& s : windows) {
        if (mc.variant != ModelVariant::Baseline)
            w.insert(w.end(), s.window.begin(), s.window.end());
        if (mc.variant != ModelVariant::Ppg)
            f.insert(f.end(), s.features.begin(), s.features.end());
    }
    auto logits = model.forward(w, f, windows.size(), false);
    ClassPrediction p;
    for (double z : logits) p.probability += 1.0 / (1.0 + std::exp(-z));
    p.probability /= static_cast<double>(windows.size());
    p.positive = p.probability >= 0.5;
    return p;
}

// Central finite-difference check of the analytic gradient: each tensor's
// largest-gradient coordinate plus a random subsample (about 1%, at least 2
// per tensor). Batch-norm runs in train mode with running-stat updates
// frozen. The error is mixed absolute/relative: the denominator is floored
// at 1e-3 so near-zero gradients are compared at a fixed absolute scale
// instead of amplifying finite-difference round-off.
inline double grad_check(Model& model, const std::vector<Sample>& batch, const TrainConfig& tc,
                         double fd_eps = 1e-4, double sample_fraction = 0.01) {
    const auto& mc = model.config();
    std::vector<std::size_t> idx(batch.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::vector<double> windows, feats;
    detail::gather_batch(batch, idx, 0, batch.size(), mc, windows, feats);
    auto targets = detail::gather_targets(batch, idx, 0, batch.size(), model, tc);

    model.params().zero_grad();
    detail::batch_loss(model, windows, feats, targets, batch.size(), true, false, true);

    Rng rng(tc.seed * 0x9E3779B97F4A7C15ull + 3);
    double worst = 0.0;
    for (auto& p : model.params().all()) {
        if (!p->trainable) continue;
        std::size_t n_check = std::max<std::size_t>(
            2, static_cast<std::size_t>(std::ceil(sample_fraction * p->size())));
        n_check = std::min(n_check, p->size());
        std::size_t peak = 0;
        for (std::size_t j = 1; j < p->size(); ++j)
            if (std::abs(p->g[j]) > std::abs(p->g[peak])) peak = j;
        for (std::size_t c = 0; c < n_check; ++c) {
            const std::size_t j =
                c == 0 ? peak : static_cast<std::size_t>(rng.below(p->size()));
            const double orig = p->v[j];
            p->v[j] = orig + fd_eps;
            const double lp = detail::batch_loss(model, windows, feats, targets, batch.size(),
                                                 true, false, false);
            p->v[j] = orig - fd_eps;
            const double lm = detail::batch_loss(model, windows, feats, targets, batch.size(),
                                                 true, false, false);
            p->v[j] = orig;
            const double fd = (lp - lm) / (2.0 * fd_eps);
            const double an = p->g[j];
            const double rel =
                std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-3});
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

} // namespace ppgbp
