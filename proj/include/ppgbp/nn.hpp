#pragma once

#include "ppgbp/errors.hpp"
#include "ppgbp/rng.hpp"

#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

namespace ppgbp::nn {

// Named learnable (or tracked) tensor: row-major values plus a gradient
// buffer of the same size.
struct Param {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> v;
    std::vector<double> g;
    bool trainable = true;

    std::size_t size() const { return v.size(); }
};

class ParamStore {
public:
    Param* add(std::string name, std::vector<std::size_t> shape, bool trainable = true) {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        auto p = std::make_unique<Param>();
        p->name = std::move(name);
        p->shape = std::move(shape);
        p->v.assign(n, 0.0);
        p->g.assign(n, 0.0);
        p->trainable = trainable;
        params_.push_back(std::move(p));
        return params_.back().get();
    }

    std::vector<std::unique_ptr<Param>>& all() { return params_; }
    const std::vector<std::unique_ptr<Param>>& all() const { return params_; }

    Param* find(const std::string& name) {
        for (auto& p : params_)
            if (p->name == name) return p.get();
        return nullptr;
    }

    void zero_grad() {
        for (auto& p : params_)
            std::fill(p->g.begin(), p->g.end(), 0.0);
    }

    std::size_t trainable_count() const {
        std::size_t n = 0;
        for (const auto& p : params_)
            if (p->trainable) n += p->size();
        return n;
    }

private:
    std::vector<std::unique_ptr<Param>> params_;
};

inline void check_finite(const std::vector<double>& v, const char* where) {
    for (double x : v)
        if (!std::isfinite(x)) throw NonFiniteActivation(std::string("non-finite value in ") + where);
}

// ---------------------------------------------------------------------------
// Layers. Each layer caches what its backward pass needs; single-threaded use
// per layer instance.
// ---------------------------------------------------------------------------

// 1D convolution, stride 1, same-length zero padding. x: [N, Cin, L].
class Conv1d {
public:
    Conv1d() = default;
    Conv1d(ParamStore& ps, const std::string& name, std::size_t cin, std::size_t cout,
           std::size_t k, Rng& rng)
        : cin_(cin), cout_(cout), k_(k) {
        w_ = ps.add(name + ".weight", {cout, cin, k});
        b_ = ps.add(name + ".bias", {cout});
        const double scale = std::sqrt(2.0 / static_cast<double>(cin * k));
        for (auto& v : w_->v) v = rng.normal(0.0, scale);
    }

    std::vector<double> forward(const std::vector<double>& x, std::size_t n, std::size_t len) {
        n_ = n; len_ = len;
        x_ = x;
        std::vector<double> y(n * cout_ * len, 0.0);
        const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(k_ / 2);
        for (std::size_t b = 0; b < n; ++b) {
            for (std::size_t oc = 0; oc < cout_; ++oc) {
                double* yo = y.data() + (b * cout_ + oc) * len;
                const double bias = b_->v[oc];
                for (std::size_t t = 0; t < len; ++t) yo[t] = bias;
                for (std::size_t ic = 0; ic < cin_; ++ic) {
                    const double* xi = x.data() + (b * cin_ + ic) * len;
                    const double* wk = w_->v.data() + (oc * cin_ + ic) * k_;
                    for (std::size_t k = 0; k < k_; ++k) {
                        const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(k) - half;
                        const double w = wk[k];
                        const std::size_t t0 = off < 0 ? static_cast<std::size_t>(-off) : 0;
                        const std::size_t t1 =
                            off > 0 ? len - static_cast<std::size_t>(off) : len;
                        const double* xs = xi + off;
                        for (std::size_t t = t0; t < t1; ++t) yo[t] += w * xs[t];
                    }
                }
            }
        }
        return y;
    }

    std::vector<double> backward(const std::vector<double>& dy) {
        std::vector<double> dx(n_ * cin_ * len_, 0.0);
        const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(k_ / 2);
        for (std::size_t b = 0; b < n_; ++b) {
            for (std::size_t oc = 0; oc < cout_; ++oc) {
                const double* dyo = dy.data() + (b * cout_ + oc) * len_;
                double acc = 0.0;
                for (std::size_t t = 0; t < len_; ++t) acc += dyo[t];
                b_->g[oc] += acc;
                for (std::size_t ic = 0; ic < cin_; ++ic) {
                    const double* xi = x_.data() + (b * cin_ + ic) * len_;
                    double* dxi = dx.data() + (b * cin_ + ic) * len_;
                    const double* wk = w_->v.data() + (oc * cin_ + ic) * k_;
                    double* gk = w_->g.data() + (oc * cin_ + ic) * k_;
                    for (std::size_t k = 0; k < k_; ++k) {
                        const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(k) - half;
                        const std::size_t t0 = off < 0 ? static_cast<std::size_t>(-off) : 0;
                        const std::size_t t1 =
                            off > 0 ? len_ - static_cast<std::size_t>(off) : len_;
                        const double* xs = xi + off;
                        double* dxs = dxi + off;
                        const double w = wk[k];
                        double gw = 0.0;
                        for (std::size_t t = t0; t < t1; ++t) {
                            gw += dyo[t] * xs[t];
                            dxs[t] += w * dyo[t];
                        }
                        gk[k] += gw;
                    }
                }
            }
        }
        return dx;
    }

    std::size_t cout() const { return cout_; }

private:
    std::size_t cin_ = 0, cout_ = 0, k_ = 0;
    Param* w_ = nullptr;
    Param* b_ = nullptr;
    std::vector<double> x_;
    std::size_t n_ = 0, len_ = 0;
};

// Per-channel batch normalization over [N, C, L]. Biased batch variance is
// used for both normalization and the running estimate.
class BatchNorm1d {
public:
    BatchNorm1d() = default;
    BatchNorm1d(ParamStore& ps, const std::string& name, std::size_t c)
        : c_(c) {
        gamma_ = ps.add(name + ".weight", {c});
        beta_ = ps.add(name + ".bias", {c});
        run_mean_ = ps.add(name + ".running_mean", {c}, false);
        run_var_ = ps.add(name + ".running_var", {c}, false);
        std::fill(gamma_->v.begin(), gamma_->v.end(), 1.0);
        std::fill(run_var_->v.begin(), run_var_->v.end(), 1.0);
    }

    static constexpr double kEps = 1e-5;
    static constexpr double kMomentum = 0.1;

    std::vector<double> forward(const std::vector<double>& x, std::size_t n, std::size_t len,
                                bool train, bool update_running = true) {
        n_ = n; len_ = len; train_ = train;
        const std::size_t m = n * len;
        std::vector<double> y(x.size());
        mean_.assign(c_, 0.0);
        ivstd_.assign(c_, 0.0);
        xhat_.assign(x.size(), 0.0);
        for (std::size_t c = 0; c < c_; ++c) {
            double mu, var;
            if (train) {
                mu = 0.0;
                for (std::size_t b = 0; b < n; ++b) {
                    const double* xi = x.data() + (b * c_ + c) * len;
                    for (std::size_t t = 0; t < len; ++t) mu += xi[t];
                }
                mu /= static_cast<double>(m);
                var = 0.0;
                for (std::size_t b = 0; b < n; ++b) {
                    const double* xi = x.data() + (b * c_ + c) * len;
                    for (std::size_t t = 0; t < len; ++t) var += (xi[t] - mu) * (xi[t] - mu);
                }
                var /= static_cast<double>(m);
                if (update_running) {
                    run_mean_->v[c] = (1.0 - kMomentum) * run_mean_->v[c] + kMomentum * mu;
                    run_var_->v[c] = (1.0 - kMomentum) * run_var_->v[c] + kMomentum * var;
                }
            } else {
                mu = run_mean_->v[c];
                var = run_var_->v[c];
            }
            const double ivstd = 1.0 / std::sqrt(var + kEps);
            mean_[c] = mu;
            ivstd_[c] = ivstd;
            const double g = gamma_->v[c], be = beta_->v[c];
            for (std::size_t b = 0; b < n; ++b) {
                const double* xi = x.data() + (b * c_ + c) * len;
                double* xh = xhat_.data() + (b * c_ + c) * len;
                double* yo = y.data() + (b * c_ + c) * len;
                for (std::size_t t = 0; t < len; ++t) {
                    xh[t] = (xi[t] - mu) * ivstd;
                    yo[t] = g * xh[t] + be;
                }
            }
        }
        return y;
    }

    std::vector<double> backward(const std::vector<double>& dy) {
        const std::size_t m = n_ * len_;
        std::vector<double> dx(dy.size());
        for (std::size_t c = 0; c < c_; ++c) {
            double sum_dy = 0.0, sum_dy_xhat = 0.0;
            for (std::size_t b = 0; b < n_; ++b) {
                const double* dyo = dy.data() + (b * c_ + c) * len_;
                const double* xh = xhat_.data() + (b * c_ + c) * len_;
                for (std::size_t t = 0; t < len_; ++t) {
                    sum_dy += dyo[t];
                    sum_dy_xhat += dyo[t] * xh[t];
                }
            }
            gamma_->g[c] += sum_dy_xhat;
            beta_->g[c] += sum_dy;
            const double g = gamma_->v[c], ivstd = ivstd_[c];
            if (train_) {
                const double inv_m = 1.0 / static_cast<double>(m);
                for (std::size_t b = 0; b < n_; ++b) {
                    const double* dyo = dy.data() + (b * c_ + c) * len_;
                    const double* xh = xhat_.data() + (b * c_ + c) * len_;
                    double* dxo = dx.data() + (b * c_ + c) * len_;
                    for (std::size_t t = 0; t < len_; ++t)
                        dxo[t] = g * ivstd *
                                 (dyo[t] - inv_m * sum_dy - inv_m * xh[t] * sum_dy_xhat);
                }
            } else {
                for (std::size_t b = 0; b < n_; ++b) {
                    const double* dyo = dy.data() + (b * c_ + c) * len_;
                    double* dxo = dx.data() + (b * c_ + c) * len_;
                    for (std::size_t t = 0; t < len_; ++t) dxo[t] = g * ivstd * dyo[t];
                }
            }
        }
        return dx;
    }

private:
    std::size_t c_ = 0;
    Param* gamma_ = nullptr;
    Param* beta_ = nullptr;
    Param* run_mean_ = nullptr;
    Param* run_var_ = nullptr;
    std::vector<double> xhat_, mean_, ivstd_;
    std::size_t n_ = 0, len_ = 0;
    bool train_ = true;
};

class Relu {
public:
    std::vector<double> forward(const std::vector<double>& x) {
        mask_.assign(x.size(), false);
        std::vector<double> y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            mask_[i] = x[i] > 0.0;
            y[i] = mask_[i] ? x[i] : 0.0;
        }
        return y;
    }
    std::vector<double> backward(const std::vector<double>& dy) {
        std::vector<double> dx(dy.size());
        for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = mask_[i] ? dy[i] : 0.0;
        return dx;
    }

private:
    std::vector<bool> mask_;
};

// Factor-2 average pooling along the last axis of [N, C, L].
class AvgPool1d {
public:
    std::vector<double> forward(const std::vector<double>& x, std::size_t rows, std::size_t len) {
        rows_ = rows; len_ = len;
        const std::size_t lo = len / 2;
        std::vector<double> y(rows * lo);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* xi = x.data() + r * len;
            double* yo = y.data() + r * lo;
            for (std::size_t t = 0; t < lo; ++t) yo[t] = 0.5 * (xi[2 * t] + xi[2 * t + 1]);
        }
        return y;
    }
    std::vector<double> backward(const std::vector<double>& dy) {
        const std::size_t lo = len_ / 2;
        std::vector<double> dx(rows_ * len_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r) {
            const double* dyo = dy.data() + r * lo;
            double* dxi = dx.data() + r * len_;
            for (std::size_t t = 0; t < lo; ++t) {
                dxi[2 * t] = 0.5 * dyo[t];
                dxi[2 * t + 1] = 0.5 * dyo[t];
            }
        }
        return dx;
    }

private:
    std::size_t rows_ = 0, len_ = 0;
};

// Dense layer on [rows, in] -> [rows, out].
class Linear {
public:
    Linear() = default;
    Linear(ParamStore& ps, const std::string& name, std::size_t in, std::size_t out, Rng& rng)
        : in_(in), out_(out) {
        w_ = ps.add(name + ".weight", {out, in});
        b_ = ps.add(name + ".bias", {out});
        const double scale = std::sqrt(2.0 / static_cast<double>(in));
        for (auto& v : w_->v) v = rng.normal(0.0, scale);
    }

    std::vector<double> forward(const std::vector<double>& x, std::size_t rows) {
        rows_ = rows;
        x_ = x;
        std::vector<double> y(rows * out_);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* xi = x.data() + r * in_;
            double* yo = y.data() + r * out_;
            for (std::size_t o = 0; o < out_; ++o) {
                const double* wr = w_->v.data() + o * in_;
                double acc = b_->v[o];
                for (std::size_t i = 0; i < in_; ++i) acc += wr[i] * xi[i];
                yo[o] = acc;
            }
        }
        return y;
    }

    std::vector<double> backward(const std::vector<double>& dy) {
        std::vector<double> dx(rows_ * in_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r) {
            const double* xi = x_.data() + r * in_;
            const double* dyo = dy.data() + r * out_;
            double* dxi = dx.data() + r * in_;
            for (std::size_t o = 0; o < out_; ++o) {
                const double d = dyo[o];
                const double* wr = w_->v.data() + o * in_;
                double* gr = w_->g.data() + o * in_;
                b_->g[o] += d;
                for (std::size_t i = 0; i < in_; ++i) {
                    gr[i] += d * xi[i];
                    dxi[i] += d * wr[i];
                }
            }
        }
        return dx;
    }

    std::size_t out() const { return out_; }

private:
    std::size_t in_ = 0, out_ = 0;
    Param* w_ = nullptr;
    Param* b_ = nullptr;
    std::vector<double> x_;
    std::size_t rows_ = 0;
};

// Layer normalization over the last dimension of [rows, dim].
class LayerNorm {
public:
    LayerNorm() = default;
    LayerNorm(ParamStore& ps, const std::string& name, std::size_t dim) : dim_(dim) {
        gamma_ = ps.add(name + ".weight", {dim});
        beta_ = ps.add(name + ".bias", {dim});
        std::fill(gamma_->v.begin(), gamma_->v.end(), 1.0);
    }

    static constexpr double kEps = 1e-5;

    std::vector<double> forward(const std::vector<double>& x, std::size_t rows) {
        rows_ = rows;
        xhat_.assign(x.size(), 0.0);
        ivstd_.assign(rows, 0.0);
        std::vector<double> y(x.size());
        for (std::size_t r = 0; r < rows; ++r) {
            const double* xi = x.data() + r * dim_;
            double mu = 0.0;
            for (std::size_t i = 0; i < dim_; ++i) mu += xi[i];
            mu /= static_cast<double>(dim_);
            double var = 0.0;
            for (std::size_t i = 0; i < dim_; ++i) var += (xi[i] - mu) * (xi[i] - mu);
            var /= static_cast<double>(dim_);
            const double ivstd = 1.0 / std::sqrt(var + kEps);
            ivstd_[r] = ivstd;
            double* xh = xhat_.data() + r * dim_;
            double* yo = y.data() + r * dim_;
            for (std::size_t i = 0; i < dim_; ++i) {
                xh[i] = (xi[i] - mu) * ivstd;
                yo[i] = gamma_->v[i] * xh[i] + beta_->v[i];
            }
        }
        return y;
    }

    std::vector<double> backward(const std::vector<double>& dy) {
        std::vector<double> dx(dy.size());
        const double inv_d = 1.0 / static_cast<double>(dim_);
        for (std::size_t r = 0; r < rows_; ++r) {
            const double* dyo = dy.data() + r * dim_;
            const double* xh = xhat_.data() + r * dim_;
            double* dxo = dx.data() + r * dim_;
            double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
            for (std::size_t i = 0; i < dim_; ++i) {
                const double dxh = dyo[i] * gamma_->v[i];
                sum_dxhat += dxh;
                sum_dxhat_xhat += dxh * xh[i];
                gamma_->g[i] += dyo[i] * xh[i];
                beta_->g[i] += dyo[i];
            }
            for (std::size_t i = 0; i < dim_; ++i) {
                const double dxh = dyo[i] * gamma_->v[i];
                dxo[i] = ivstd_[r] * (dxh - inv_d * sum_dxhat - inv_d * xh[i] * sum_dxhat_xhat);
            }
        }
        return dx;
    }

private:
    std::size_t dim_ = 0;
    Param* gamma_ = nullptr;
    Param* beta_ = nullptr;
    std::vector<double> xhat_, ivstd_;
    std::size_t rows_ = 0;
};

// Multi-head self-attention over [N, T, D] (row-major tokens).
class MultiHeadAttention {
public:
    MultiHeadAttention() = default;
    MultiHeadAttention(ParamStore& ps, const std::string& name, std::size_t dim,
                       std::size_t heads, Rng& rng)
        : dim_(dim), heads_(heads), dh_(dim / heads),
          wq_(ps, name + ".q", dim, dim, rng),
          wk_(ps, name + ".k", dim, dim, rng),
          wv_(ps, name + ".v", dim, dim, rng),
          wo_(ps, name + ".out", dim, dim, rng) {
        if (dim % heads != 0) throw ShapeMismatch("attention: dim not divisible by heads");
    }

    std::vector<double> forward(const std::vector<double>& x, std::size_t n, std::size_t t) {
        n_ = n; t_ = t;
        const std::size_t rows = n * t;
        q_ = wq_.forward(x, rows);
        k_ = wk_.forward(x, rows);
        v_ = wv_.forward(x, rows);

        attn_.assign(n * heads_ * t * t, 0.0);
        const double scale = 1.0 / std::sqrt(static_cast<double>(dh_));
        std::vector<double> ctx(rows * dim_, 0.0);
        for (std::size_t b = 0; b < n; ++b) {
            for (std::size_t h = 0; h < heads_; ++h) {
                double* a = attn_.data() + ((b * heads_) + h) * t * t;
                for (std::size_t i = 0; i < t; ++i) {
                    const double* qi = q_.data() + (b * t + i) * dim_ + h * dh_;
                    double mx = -1e300;
                    for (std::size_t j = 0; j < t; ++j) {
                        const double* kj = k_.data() + (b * t + j) * dim_ + h * dh_;
                        double s = 0.0;
                        for (std::size_t d = 0; d < dh_; ++d) s += qi[d] * kj[d];
                        s *= scale;
                        a[i * t + j] = s;
                        mx = std::max(mx, s);
                    }
                    double z = 0.0;
                    for (std::size_t j = 0; j < t; ++j) {
                        a[i * t + j] = std::exp(a[i * t + j] - mx);
                        z += a[i * t + j];
                    }
                    const double inv_z = 1.0 / z;
                    double* co = ctx.data() + (b * t + i) * dim_ + h * dh_;
                    for (std::size_t j = 0; j < t; ++j) {
                        a[i * t + j] *= inv_z;
                        const double* vj = v_.data() + (b * t + j) * dim_ + h * dh_;
                        const double w = a[i * t + j];
                        for (std::size_t d = 0; d < dh_; ++d) co[d] += w * vj[d];
                    }
                }
            }
        }
        return wo_.forward(ctx, rows);
    }

    std::vector<double> backward(const std::vector<double>& dy) {
        const std::size_t rows = n_ * t_;
        auto dctx = wo_.backward(dy);
        std::vector<double> dq(rows * dim_, 0.0), dk(rows * dim_, 0.0), dv(rows * dim_, 0.0);
        const double scale = 1.0 / std::sqrt(static_cast<double>(dh_));
        for (std::size_t b = 0; b < n_; ++b) {
            for (std::size_t h = 0; h < heads_; ++h) {
                const double* a = attn_.data() + ((b * heads_) + h) * t_ * t_;
                for (std::size_t i = 0; i < t_; ++i) {
                    const double* dco = dctx.data() + (b * t_ + i) * dim_ + h * dh_;
                    // dA[i][j] = dctx_i . v_j ; softmax backward within row i
                    std::vector<double> da(t_);
                    double dot = 0.0;
                    for (std::size_t j = 0; j < t_; ++j) {
                        const double* vj = v_.data() + (b * t_ + j) * dim_ + h * dh_;
                        double s = 0.0;
                        for (std::size_t d = 0; d < dh_; ++d) s += dco[d] * vj[d];
                        da[j] = s;
                        dot += s * a[i * t_ + j];
                        double* dvj = dv.data() + (b * t_ + j) * dim_ + h * dh_;
                        const double w = a[i * t_ + j];
                        for (std::size_t d = 0; d < dh_; ++d) dvj[d] += w * dco[d];
                    }
                    const double* qi = q_.data() + (b * t_ + i) * dim_ + h * dh_;
                    double* dqi = dq.data() + (b * t_ + i) * dim_ + h * dh_;
                    for (std::size_t j = 0; j < t_; ++j) {
                        const double ds = a[i * t_ + j] * (da[j] - dot) * scale;
                        const double* kj = k_.data() + (b * t_ + j) * dim_ + h * dh_;
                        double* dkj = dk.data() + (b * t_ + j) * dim_ + h * dh_;
                        for (std::size_t d = 0; d < dh_; ++d) {
                            dqi[d] += ds * kj[d];
                            dkj[d] += ds * qi[d];
                        }
                    }
                }
            }
        }
        auto dx1 = wq_.backward(dq);
        auto dx2 = wk_.backward(dk);
        auto dx3 = wv_.backward(dv);
        for (std::size_t i = 0; i < dx1.size(); ++i) dx1[i] += dx2[i] + dx3[i];
        return dx1;
    }

    // row-stochastic attention weights from the last forward pass
    const std::vector<double>& attention() const { return attn_; }
    std::size_t heads() const { return heads_; }

private:
    std::size_t dim_ = 0, heads_ = 0, dh_ = 0;
    Linear wq_, wk_, wv_, wo_;
    std::vector<double> q_, k_, v_, attn_;
    std::size_t n_ = 0, t_ = 0;
};

} // namespace ppgbp::nn
