#include <cmath>
#include <sstream>

#include "rfsynth/core/rng.hpp"
#include "rfsynth/model/model.hpp"

namespace rfsynth::model {

namespace {

ModelDims toy_dims() {
  ModelDims d;
  d.patch = 2;
  d.image_h = 8;
  d.image_w = 8;  // M = 16
  d.d = 16;
  d.layers = 2;
  d.heads = 2;
  d.enc_ff = 32;
  d.d_lm = 16;
  d.lm_layers = 2;
  d.q_heads = 4;
  d.kv_heads = 2;
  d.head_dim = 4;
  d.d_ff = 32;
  d.vocab = 32;
  return d;
}

ImageTensor random_image(const ModelDims& d, Rng& rng) {
  ImageTensor img{d.image_h, d.image_w, d.channels, {}};
  for (int i = 0; i < d.image_h * d.image_w * d.channels; ++i) img.data.push_back(rng.uniform());
  return img;
}

std::vector<int> random_ids(int n, int vocab, Rng& rng) {
  std::vector<int> ids;
  for (int i = 0; i < n; ++i) ids.push_back(static_cast<int>(rng.uniform_int(0, vocab - 1)));
  return ids;
}

/// Scales the toy weights up so attention is far from uniform.
void sharpen(ModelParams& m, double f) {
  for (auto& l : m.decoder) {
    l.wq *= f;
    l.wk *= f;
  }
  for (auto& l : m.encoder) {
    l.wq *= f;
    l.wk *= f;
  }
}

/// Per-head causal attention with explicit loops, one key-value head per
/// query head.
Mat naive_causal_mha(const Mat& u, const DecoderLayer& l, int heads, int dk) {
  const Mat q = u * l.wq, k = u * l.wk, v = u * l.wv;
  const auto n = u.rows();
  Mat cat = Mat::Zero(n, heads * dk);
  for (int h = 0; h < heads; ++h)
    for (Eigen::Index i = 0; i < n; ++i) {
      std::vector<double> s;
      double mx = -1e300;
      for (Eigen::Index j = 0; j <= i; ++j) {
        double dot = 0.0;
        for (int c = 0; c < dk; ++c) dot += q(i, h * dk + c) * k(j, h * dk + c);
        s.push_back(dot / std::sqrt(static_cast<double>(dk)));
        mx = std::max(mx, s.back());
      }
      double z = 0.0;
      for (auto& x : s) z += x = std::exp(x - mx);
      for (Eigen::Index j = 0; j <= i; ++j)
        for (int c = 0; c < dk; ++c) cat(i, h * dk + c) += s[static_cast<std::size_t>(j)] / z * v(j, h * dk + c);
    }
  return cat * l.wo;
}

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(3);
  o << std::scientific << v;
  return o.str();
}

}  // namespace

std::vector<CheckResult> run_property_suite(std::uint64_t seed, int trials) {
  std::vector<CheckResult> out;
  Rng rng(derive_seed(seed, "model-check"));
  const auto d = toy_dims();

  {
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
      auto m = init_params(d, derive_seed(seed, "rows", static_cast<std::uint64_t>(t)));
      sharpen(m, 50.0);
      Trace tr;
      const Mat rf = adapter(vit_forward(patchify(random_image(d, rng), d.patch), m, d, &tr), m.w_proj, m.b_proj);
      decoder_forward(rf, random_ids(8, d.vocab, rng), m, d, &tr);
      for (const auto& p : tr.attention)
        for (Eigen::Index i = 0; i < p.rows(); ++i) worst = std::max(worst, std::abs(p.row(i).sum() - 1.0));
    }
    out.push_back({"attention_rows_sum_to_one", worst <= 1e-9, "max |row sum - 1| = " + fmt(worst)});
  }

  {
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
      auto m = init_params(d, derive_seed(seed, "causal", static_cast<std::uint64_t>(t)));
      sharpen(m, 50.0);
      const Mat rf = adapter(vit_forward(patchify(random_image(d, rng), d.patch), m, d), m.w_proj, m.b_proj);
      auto ids = random_ids(10, d.vocab, rng);
      const Mat p0 = decoder_forward(rf, ids, m, d);
      const auto j = static_cast<std::size_t>(rng.uniform_int(1, 9));
      for (std::size_t k = j; k < ids.size(); ++k) ids[k] = (ids[k] + 1 + static_cast<int>(k)) % d.vocab;
      const Mat p1 = decoder_forward(rf, ids, m, d);
      const auto rows = static_cast<Eigen::Index>(j);
      worst = std::max(worst, (p0.topRows(rows) - p1.topRows(rows)).cwiseAbs().maxCoeff());
    }
    out.push_back({"causal_future_independence", worst <= 1e-12, "max diff before perturbation = " + fmt(worst)});
  }

  {
    auto dm = d;
    dm.q_heads = dm.kv_heads = 4;
    dm.rope = false;
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
      auto m = init_params(dm, derive_seed(seed, "gqa", static_cast<std::uint64_t>(t)));
      sharpen(m, 50.0);
      Mat u(12, dm.d_lm);
      for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = rng.normal();
      const auto& l = m.decoder.front();
      worst = std::max(worst, (gqa_causal(u, l, dm) - naive_causal_mha(u, l, dm.q_heads, dm.head_dim)).cwiseAbs().maxCoeff());
    }
    out.push_back({"gqa_equals_mha_when_hq_eq_hk", worst <= 1e-9, "max diff = " + fmt(worst)});
  }

  {
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
      Vec x(32);
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.normal() * 5.0;
      const Vec y = rmsnorm(x, Vec::Ones(32), 1e-8);
      worst = std::max(worst, std::abs(std::sqrt(y.squaredNorm() / 32.0) - 1.0));
    }
    out.push_back({"rmsnorm_unit_rms", worst <= 1e-6, "max |rms - 1| = " + fmt(worst)});
  }

  {
    const int v = 16, n = 9;
    const Mat probs = Mat::Constant(n, v, 1.0 / v);
    std::vector<int> targets = random_ids(n, v, rng);
    std::vector<bool> mask(n, false);
    for (int i = 4; i < n; ++i) mask[static_cast<std::size_t>(i)] = true;
    const double loss = sft_loss(probs, targets, mask);
    const double expect = 5.0 * std::log(16.0);
    out.push_back({"sft_loss_uniform", std::abs(loss - expect) <= 1e-9, "loss = " + fmt(loss) + ", expected " + fmt(expect)});
  }

  {
    ModelDims big;
    big.image_h = big.image_w = 518;
    big.patch = 14;
    const int m = big.num_patches();
    out.push_back({"patch_count_law", m == 1369, "518x518 at P=14 gives " + std::to_string(m) + " tokens"});
  }

  {
    double worst = 0.0;
    for (int t = 0; t < std::max(1, trials / 10); ++t) {
      auto m = init_params(d, derive_seed(seed, "perm", static_cast<std::uint64_t>(t)));
      sharpen(m, 50.0);
      const Mat x = patchify(random_image(d, rng), d.patch);
      std::vector<Eigen::Index> perm(static_cast<std::size_t>(x.rows()));
      for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<Eigen::Index>(i);
      rng.shuffle(perm);
      Mat xp(x.rows(), x.cols());
      auto mp = m;
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
        mp.pos.row(i) = m.pos.row(perm[static_cast<std::size_t>(i)]);
      }
      const Mat h = vit_forward(x, m, d), hp = vit_forward(xp, mp, d);
      for (Eigen::Index i = 0; i < x.rows(); ++i)
        worst = std::max(worst, (hp.row(i) - h.row(perm[static_cast<std::size_t>(i)])).cwiseAbs().maxCoeff());
    }
    out.push_back({"encoder_permutation_equivariance", worst <= 1e-9, "max diff = " + fmt(worst)});
  }
  return out;
}

}  // namespace rfsynth::model
