#pragma once

#include <string>
#include <vector>

#include "lograd/toy/layers.hpp"

namespace lograd::toy {

// Multi-head self-attention with a fused qkv weight (3d x d) and an output
// projection (d x d). Both are projectable.
class AttentionBlockToy {
 public:
  struct Cache {
    DenseMatrix x;
    DenseMatrix qkv;
    DenseMatrix concat;
    std::vector<AttentionCache> heads;
  };

  AttentionBlockToy() = default;
  AttentionBlockToy(const std::string& prefix, std::size_t dim, std::size_t heads, Rng& rng)
      : qkv_(prefix + ".qkv", init_weight(3 * dim, dim, rng), true),
        proj_(prefix + ".proj", init_weight(dim, dim, rng), true),
        dim_(dim),
        heads_(heads) {
    if (heads == 0 || dim % heads != 0) {
      throw InvalidArgument("AttentionBlockToy: model dim " + std::to_string(dim) +
                            " not divisible by head count " + std::to_string(heads));
    }
  }

  std::size_t model_dim() const noexcept { return dim_; }
  std::size_t head_count() const noexcept { return heads_; }
  Param& qkv_weight() noexcept { return qkv_; }
  Param& proj_weight() noexcept { return proj_; }
  const Param& qkv_weight() const noexcept { return qkv_; }
  const Param& proj_weight() const noexcept { return proj_; }
  ParamList parameters() { return {&qkv_, &proj_}; }

  DenseMatrix forward(const DenseMatrix& x, Cache* cache = nullptr) const {
    if (x.cols() != dim_) {
      throw DimensionError("attention_forward: tokens " + shape_string(x.rows(), x.cols()) +
                           " for model dim " + std::to_string(dim_));
    }
    const std::size_t hd = dim_ / heads_;
    DenseMatrix qkv = linear(x, qkv_.value);
    DenseMatrix concat(x.rows(), dim_);
    std::vector<AttentionCache> hc(cache ? heads_ : 0);
    for (std::size_t h = 0; h < heads_; ++h) {
      const DenseMatrix q = column_block(qkv, h * hd, hd);
      const DenseMatrix k = column_block(qkv, dim_ + h * hd, hd);
      const DenseMatrix v = column_block(qkv, 2 * dim_ + h * hd, hd);
      set_column_block(concat, h * hd, attend(q, k, v, cache ? &hc[h] : nullptr));
    }
    DenseMatrix out = linear(concat, proj_.value);
    if (cache) *cache = {x, std::move(qkv), std::move(concat), std::move(hc)};
    return out;
  }

  // Accumulates weight gradients; returns dX.
  DenseMatrix backward(const Cache& c, const DenseMatrix& dout) {
    const std::size_t hd = dim_ / heads_;
    const DenseMatrix dconcat = linear_backward(c.concat, proj_.value, dout, proj_.grad);
    DenseMatrix dqkv(c.qkv.rows(), c.qkv.cols());
    for (std::size_t h = 0; h < heads_; ++h) {
      const AttentionGrads g = attend_backward(c.heads[h], column_block(dconcat, h * hd, hd));
      set_column_block(dqkv, h * hd, g.dq);
      set_column_block(dqkv, dim_ + h * hd, g.dk);
      set_column_block(dqkv, 2 * dim_ + h * hd, g.dv);
    }
    return linear_backward(c.x, qkv_.value, dqkv, qkv_.grad);
  }

 private:
  Param qkv_;
  Param proj_;
  std::size_t dim_ = 0;
  std::size_t heads_ = 1;
};

// Cross-attention where one stream supplies the queries and the other the
// keys and values: W_o attend(F_q W_q^T, F_kv W_k^T, F_kv W_v^T).
class CrossAttentionFusion {
 public:
  struct Cache {
    DenseMatrix query_in, kv_in;
    AttentionCache attn;
    DenseMatrix attended;
  };
  struct InputGrads {
    DenseMatrix d_query, d_kv;
  };

  CrossAttentionFusion() = default;
  CrossAttentionFusion(const std::string& prefix, std::size_t query_dim, std::size_t kv_dim,
                       std::size_t attn_dim, std::size_t out_dim, Rng& rng)
      : wq_(prefix + ".w_q", init_weight(attn_dim, query_dim, rng), true),
        wk_(prefix + ".w_k", init_weight(attn_dim, kv_dim, rng), true),
        wv_(prefix + ".w_v", init_weight(attn_dim, kv_dim, rng), true),
        wo_(prefix + ".w_o", init_weight(out_dim, attn_dim, rng), true) {}

  Param& w_q() noexcept { return wq_; }
  Param& w_k() noexcept { return wk_; }
  Param& w_v() noexcept { return wv_; }
  Param& w_o() noexcept { return wo_; }
  ParamList parameters() { return {&wq_, &wk_, &wv_, &wo_}; }

  DenseMatrix forward(const DenseMatrix& query_in, const DenseMatrix& kv_in, Cache* cache = nullptr) const {
    if (query_in.cols() != wq_.value.cols() || kv_in.cols() != wk_.value.cols()) {
      throw DimensionError("cross_attention_forward: query " + shape_string(query_in.rows(), query_in.cols()) +
                           ", key/value " + shape_string(kv_in.rows(), kv_in.cols()) + " vs W_q " +
                           shape_string(wq_.value.rows(), wq_.value.cols()) + ", W_k " +
                           shape_string(wk_.value.rows(), wk_.value.cols()));
    }
    AttentionCache ac;
    DenseMatrix attended = attend(linear(query_in, wq_.value), linear(kv_in, wk_.value),
                                  linear(kv_in, wv_.value), cache ? &ac : nullptr);
    DenseMatrix out = linear(attended, wo_.value);
    if (cache) *cache = {query_in, kv_in, std::move(ac), std::move(attended)};
    return out;
  }

  InputGrads backward(const Cache& c, const DenseMatrix& dout) {
    const DenseMatrix dattended = linear_backward(c.attended, wo_.value, dout, wo_.grad);
    const AttentionGrads g = attend_backward(c.attn, dattended);
    InputGrads out;
    out.d_query = linear_backward(c.query_in, wq_.value, g.dq, wq_.grad);
    out.d_kv = linear_backward(c.kv_in, wk_.value, g.dk, wk_.grad);
    add_in_place(out.d_kv, linear_backward(c.kv_in, wv_.value, g.dv, wv_.grad));
    return out;
  }

 private:
  Param wq_, wk_, wv_, wo_;
};

}  // namespace lograd::toy
