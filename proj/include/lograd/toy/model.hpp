#pragma once

#include <string>
#include <vector>

#include "lograd/toy/attention.hpp"
#include "lograd/toy/dataset.hpp"
#include "lograd/toy/layers.hpp"
#include "lograd/toy/losses.hpp"

namespace lograd::toy {

struct DualEncoderConfig {
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t patch = 4;
  std::size_t model_dim = 32;
  std::size_t heads = 4;
  std::uint64_t seed = 0;

  std::size_t tokens() const { return (height / patch) * (width / patch); }
  std::size_t patch_pixels() const { return patch * patch; }
};

// Image -> patch tokens (L x patch^2), row-major over the patch grid.
inline DenseMatrix patchify(const std::vector<double>& image, std::size_t h, std::size_t w, std::size_t p) {
  if (p == 0 || h % p != 0 || w % p != 0) {
    throw DimensionError("patchify: image " + shape_string(h, w) + " not divisible by patch " + std::to_string(p));
  }
  if (image.size() != h * w) throw DimensionError("patchify: image buffer does not match " + shape_string(h, w));
  const std::size_t gw = w / p;
  DenseMatrix tokens((h / p) * gw, p * p);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      tokens((y / p) * gw + x / p, (y % p) * p + x % p) = image[y * w + x];
    }
  }
  return tokens;
}

// Two patch encoders (tanh embedding + residual self-attention), a
// cross-attention fusion where the depth stream queries the semantic stream,
// and a linear per-token head emitting kClassCount x patch^2 logits.
// The depth stream sees the same grayscale patches as the semantic stream;
// the toy data carries no separate depth channel.
class DualEncoderToy {
 public:
  struct Cache {
    DenseMatrix tokens;
    DenseMatrix sem_hidden, depth_hidden;
    AttentionBlockToy::Cache sem_attn, depth_attn;
    DenseMatrix sem_out, depth_out;
    CrossAttentionFusion::Cache fusion;
    DenseMatrix fused;
    DenseMatrix probs;  // kClassCount x (H*W)
  };

  explicit DualEncoderToy(const DualEncoderConfig& cfg) : cfg_(cfg) {
    if (cfg.height % cfg.patch != 0 || cfg.width % cfg.patch != 0) {
      throw InvalidArgument("DualEncoderToy: image " + shape_string(cfg.height, cfg.width) +
                            " not divisible by patch " + std::to_string(cfg.patch));
    }
    Rng rng(derive_seed(cfg.seed, hash_name("dual_encoder")));
    const std::size_t d = cfg.model_dim;
    const std::size_t pp = cfg.patch_pixels();
    sem_embed_ = Param("semantic.embed", init_weight(d, pp, rng), false);
    sem_attn_ = AttentionBlockToy("semantic.attn", d, cfg.heads, rng);
    depth_embed_ = Param("depth.embed", init_weight(d, pp, rng), false);
    depth_attn_ = AttentionBlockToy("depth.attn", d, cfg.heads, rng);
    fusion_ = CrossAttentionFusion("fusion", d, d, d, d, rng);
    dec_w_ = Param("decoder.weight", init_weight(kClassCount * pp, d, rng), false);
    dec_b_ = Param("decoder.bias", DenseMatrix(1, kClassCount * pp), false);
  }

  const DualEncoderConfig& config() const noexcept { return cfg_; }
  static constexpr std::size_t output_channels() { return kClassCount; }

  ParamList parameters() {
    ParamList out{&sem_embed_};
    for (Param* p : sem_attn_.parameters()) out.push_back(p);
    out.push_back(&depth_embed_);
    for (Param* p : depth_attn_.parameters()) out.push_back(p);
    for (Param* p : fusion_.parameters()) out.push_back(p);
    out.push_back(&dec_w_);
    out.push_back(&dec_b_);
    return out;
  }

  void zero_grad() {
    for (Param* p : parameters()) p->zero_grad();
  }

  // kClassCount x (H*W) probabilities.
  DenseMatrix forward(const SyntheticLandmarkSample& s, Cache* cache = nullptr) const {
    if (s.height != cfg_.height || s.width != cfg_.width) {
      throw DimensionError("DualEncoderToy: sample " + shape_string(s.height, s.width) + " vs model " +
                           shape_string(cfg_.height, cfg_.width));
    }
    Cache local;
    Cache& c = cache ? *cache : local;
    c.tokens = patchify(s.image, s.height, s.width, cfg_.patch);
    c.sem_hidden = tanh_of(linear(c.tokens, sem_embed_.value));
    c.sem_out = c.sem_hidden;
    add_in_place(c.sem_out, sem_attn_.forward(c.sem_hidden, &c.sem_attn));
    c.depth_hidden = tanh_of(linear(c.tokens, depth_embed_.value));
    c.depth_out = c.depth_hidden;
    add_in_place(c.depth_out, depth_attn_.forward(c.depth_hidden, &c.depth_attn));
    c.fused = c.depth_out;
    add_in_place(c.fused, fusion_.forward(c.depth_out, c.sem_out, &c.fusion));
    DenseMatrix logits = linear(c.fused, dec_w_.value);
    logits.view().rowwise() += dec_b_.value.view().row(0);
    c.probs = DenseMatrix(kClassCount, s.pixels());
    for_each_pixel([&](std::size_t tok, std::size_t col, std::size_t ch, std::size_t pix) {
      c.probs(ch, pix) = sigmoid(logits(tok, col));
    });
    return c.probs;
  }

  // Accumulates parameter gradients of `loss` given dLoss/dProbs.
  void backward(const Cache& c, const DenseMatrix& dprobs) {
    DenseMatrix dlogits(c.fused.rows(), dec_w_.value.rows());
    for_each_pixel([&](std::size_t tok, std::size_t col, std::size_t ch, std::size_t pix) {
      const double p = c.probs(ch, pix);
      dlogits(tok, col) = dprobs(ch, pix) * p * (1.0 - p);
    });
    dec_b_.grad.view().row(0) += dlogits.view().colwise().sum();
    DenseMatrix dfused = linear_backward(c.fused, dec_w_.value, dlogits, dec_w_.grad);
    const auto fg = fusion_.backward(c.fusion, dfused);
    DenseMatrix d_depth = std::move(dfused);
    add_in_place(d_depth, fg.d_query);
    encoder_backward(c.tokens, c.depth_hidden, c.depth_attn, d_depth, depth_embed_, depth_attn_);
    encoder_backward(c.tokens, c.sem_hidden, c.sem_attn, fg.d_kv, sem_embed_, sem_attn_);
  }

  // Hybrid loss of one sample; adds its gradient times `grad_scale` when asked.
  double loss(const SyntheticLandmarkSample& s, HybridWeights w, bool accumulate, double grad_scale = 1.0) {
    Cache c;
    const DenseMatrix probs = forward(s, &c);
    const DenseMatrix target = one_hot(s);
    if (!accumulate) return hybrid_loss(probs, target, w);
    DenseMatrix dprobs;
    const double value = hybrid_loss(probs, target, w, &dprobs);
    if (grad_scale != 1.0) dprobs.view() *= grad_scale;
    backward(c, dprobs);
    return value;
  }

 private:
  template <typename F>
  void for_each_pixel(F&& f) const {
    const std::size_t p = cfg_.patch;
    const std::size_t pp = p * p;
    const std::size_t gw = cfg_.width / p;
    for (std::size_t tok = 0; tok < cfg_.tokens(); ++tok) {
      const std::size_t ty = tok / gw, tx = tok % gw;
      for (std::size_t ch = 0; ch < kClassCount; ++ch) {
        for (std::size_t k = 0; k < pp; ++k) {
          const std::size_t pix = (ty * p + k / p) * cfg_.width + tx * p + k % p;
          f(tok, ch * pp + k, ch, pix);
        }
      }
    }
  }

  static void encoder_backward(const DenseMatrix& tokens, const DenseMatrix& hidden,
                               const AttentionBlockToy::Cache& attn_cache, const DenseMatrix& dout,
                               Param& embed, AttentionBlockToy& attn) {
    DenseMatrix dhidden = dout;
    add_in_place(dhidden, attn.backward(attn_cache, dout));
    const DenseMatrix dpre = tanh_backward(hidden, dhidden);
    embed.grad.view().noalias() += dpre.view().transpose() * tokens.view();
  }

  DualEncoderConfig cfg_;
  Param sem_embed_, depth_embed_;
  AttentionBlockToy sem_attn_, depth_attn_;
  CrossAttentionFusion fusion_;
  Param dec_w_, dec_b_;
};

}  // namespace lograd::toy
