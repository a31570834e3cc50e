#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "rfsynth/core/error.hpp"
#include "rfsynth/core/rng.hpp"
#include "rfsynth/model/model.hpp"

using namespace rfsynth;
using namespace rfsynth::model;

namespace {

ModelDims toy() {
  ModelDims d;
  d.patch = 2;
  d.image_h = d.image_w = 8;
  d.d = 16;
  d.heads = 2;
  d.enc_ff = 32;
  d.d_lm = 16;
  d.q_heads = 4;
  d.kv_heads = 2;
  d.head_dim = 4;
  d.d_ff = 32;
  d.vocab = 16;
  d.max_len = 64;
  return d;
}

Mat random_mat(Rng& rng, int r, int c, double scale = 1.0) {
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = scale * rng.normal();
  return m;
}

ImageTensor random_image(Rng& rng, int h, int w, int c) {
  ImageTensor img{h, w, c, {}};
  for (int i = 0; i < h * w * c; ++i) img.data.push_back(rng.uniform());
  return img;
}

// Independent loop implementation of single-head attention.
Mat naive_attention(const Mat& x, const Mat& wq, const Mat& wk, const Mat& wv, const Mat& wo) {
  const int n = static_cast<int>(x.rows()), d = static_cast<int>(x.cols()), dh = static_cast<int>(wq.cols());
  std::vector<std::vector<double>> q(n, std::vector<double>(dh)), k = q, v = q;
  for (int t = 0; t < n; ++t)
    for (int j = 0; j < dh; ++j)
      for (int i = 0; i < d; ++i) {
        q[t][j] += x(t, i) * wq(i, j);
        k[t][j] += x(t, i) * wk(i, j);
        v[t][j] += x(t, i) * wv(i, j);
      }
  Mat out = Mat::Zero(n, wo.cols());
  for (int t = 0; t < n; ++t) {
    std::vector<double> s(n);
    double mx = -1e300, z = 0;
    for (int u = 0; u < n; ++u) {
      for (int j = 0; j < dh; ++j) s[u] += q[t][j] * k[u][j];
      s[u] /= std::sqrt(static_cast<double>(dh));
      mx = std::max(mx, s[u]);
    }
    for (auto& e : s) z += e = std::exp(e - mx);
    std::vector<double> ctx(dh);
    for (int u = 0; u < n; ++u)
      for (int j = 0; j < dh; ++j) ctx[j] += s[u] / z * v[u][j];
    for (int c = 0; c < wo.cols(); ++c)
      for (int j = 0; j < dh; ++j) out(t, c) += ctx[j] * wo(j, c);
  }
  return out;
}

}  // namespace

TEST_CASE("518 x 518 image at P = 14 gives 1369 tokens") {
  ModelDims d;
  CHECK(d.num_patches() == 1369);
  ImageTensor img{518, 518, 1, std::vector<double>(518 * 518, 0.5)};
  const auto p = patchify(img, 14);
  CHECK(p.rows() == 1369);
  CHECK(p.cols() == 196);
}

TEST_CASE("single patch holds the whole image") {
  Rng rng(1);
  const auto img = random_image(rng, 4, 4, 2);
  const auto p = patchify(img, 4);
  REQUIRE(p.rows() == 1);
  for (int i = 0; i < 32; ++i) CHECK(p(0, i) == img.data[i]);
}

TEST_CASE("28 x 28 patchify matches hand indexing") {
  Rng rng(2);
  const auto img = random_image(rng, 28, 28, 1);
  const auto p = patchify(img, 14);
  REQUIRE(p.rows() == 4);
  // Patch 1 is the top-right block, patch 2 the bottom-left.
  CHECK(p(0, 0) == img.data[0]);
  CHECK(p(1, 0) == img.data[14]);
  CHECK(p(2, 0) == img.data[14 * 28]);
  CHECK(p(3, 15) == img.data[(14 + 1) * 28 + 14 + 1]);
  for (int m = 0; m < 4; ++m)
    for (int y = 0; y < 14; ++y)
      for (int x = 0; x < 14; ++x)
        CHECK(p(m, y * 14 + x) == img.data[((m / 2) * 14 + y) * 28 + (m % 2) * 14 + x]);
  CHECK_THROWS_AS(patchify(random_image(rng, 30, 28, 1), 14), InputError);
}

TEST_CASE("encoder with no layers returns E x + p") {
  auto d = toy();
  d.layers = 0;
  const auto m = init_params(d, 3);
  Rng rng(3);
  const auto x = patchify(random_image(rng, 8, 8, 1), 2);
  const Mat z = vit_forward(x, m, d);
  CHECK((z - (x * m.embed + m.pos)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("single-token attention returns the value projection") {
  Rng rng(4);
  const Mat x = random_mat(rng, 1, 8);
  const Mat wq = random_mat(rng, 8, 8), wk = random_mat(rng, 8, 8), wv = random_mat(rng, 8, 8), wo = random_mat(rng, 8, 8);
  CHECK((mha(x, wq, wk, wv, wo, 2) - x * wv * wo).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("M = 3, d = 4, one head matches a loop oracle") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat x = random_mat(rng, 3, 4);
    const Mat wq = random_mat(rng, 4, 4), wk = random_mat(rng, 4, 4), wv = random_mat(rng, 4, 4), wo = random_mat(rng, 4, 4);
    CHECK((mha(x, wq, wk, wv, wo, 1) - naive_attention(x, wq, wk, wv, wo)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("adapter is affine and copies with an identity-padded matrix") {
  Rng rng(6);
  const Mat h = random_mat(rng, 5, 4);
  Mat w = Mat::Zero(4, 6);
  w.leftCols(4) = Mat::Identity(4, 4);
  const Mat out = adapter(h, w, Vec::Zero(6));
  CHECK((out.leftCols(4) - h).cwiseAbs().maxCoeff() == 0.0);
  CHECK(out.rightCols(2).cwiseAbs().maxCoeff() == 0.0);
  const Mat w2 = random_mat(rng, 4, 6), h2 = random_mat(rng, 5, 4);
  const Vec b = random_mat(rng, 1, 6);
  const Mat lhs = adapter(2.0 * h + h2, w2, b);
  const Mat rhs = 2.0 * adapter(h, w2, b) + adapter(h2, w2, b) - 2.0 * b.replicate(5, 1);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("RMSNorm") {
  const Vec g = Vec::Ones(6);
  const Vec c = Vec::Constant(6, 3.7);
  CHECK((rmsnorm(c, g, 1e-12).array() - 1.0).abs().maxCoeff() < 1e-9);
  const Vec z = rmsnorm(Vec::Zero(6), g, 1e-6);
  CHECK(z.allFinite());
  CHECK(z.cwiseAbs().maxCoeff() == 0.0);
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const Vec x = random_mat(rng, 1, 16, 5.0);
    const Vec y = rmsnorm(x, Vec::Ones(16), 1e-12);
    CHECK(std::sqrt(y.squaredNorm() / 16) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("GQA group mapping") {
  CHECK(gqa_group(0, 4, 2) == 0);
  CHECK(gqa_group(1, 4, 2) == 0);
  CHECK(gqa_group(2, 4, 2) == 1);
  CHECK(gqa_group(3, 4, 2) == 1);
  for (int h = 0; h < 4; ++h) CHECK(gqa_group(h, 4, 4) == h);
}

TEST_CASE("GQA on one token is V W_O of its group") {
  auto d = toy();
  d.rope = false;
  const auto m = init_params(d, 8);
  Rng rng(8);
  const Mat u = random_mat(rng, 1, d.d_lm);
  const auto& l = m.decoder[0];
  const Mat v = u * l.wv;
  Mat cat(1, d.q_heads * d.head_dim);
  for (int h = 0; h < d.q_heads; ++h)
    cat.middleCols(h * d.head_dim, d.head_dim) = v.middleCols(gqa_group(h, d.q_heads, d.kv_heads) * d.head_dim, d.head_dim);
  CHECK((gqa_causal(u, l, d) - cat * l.wo).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gated MLP limits") {
  auto d = toy();
  auto m = init_params(d, 9);
  auto l = m.decoder[0];
  Rng rng(9);
  const Mat x = random_mat(rng, 3, d.d_lm);
  // A saturated SiLU passes its input through, so the gate is the constant b.
  const double b = 60.0;
  l.w_gate.setZero();
  l.b_gate.setConstant(b);
  Mat up = x * l.w_up;
  up.rowwise() += l.b_up;
  Mat expect = b * up * l.w_down;
  expect.rowwise() += l.b_down;
  CHECK((gated_mlp(x, l) - expect).cwiseAbs().maxCoeff() < 1e-9);
  l.b_gate.setZero();
  l.b_up.setZero();
  l.b_down.setZero();
  CHECK(gated_mlp(Mat::Zero(3, d.d_lm), l).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("decoder distributions are normalized and causal") {
  const auto d = toy();
  const auto m = init_params(d, 10);
  Rng rng(10);
  const Mat rf = random_mat(rng, 4, d.d_lm);
  std::vector<int> ids = {1, 5, 7, 2, 9};
  Trace trace;
  const Mat p = decoder_forward(rf, ids, m, d, &trace);
  REQUIRE(p.rows() == 5);
  REQUIRE(p.cols() == d.vocab);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(p.row(i).sum() - 1.0) < 1e-9);
  for (const auto& a : trace.attention) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      CHECK(std::abs(a.row(i).sum() - 1.0) < 1e-9);
      for (Eigen::Index j = i + 1; j < a.cols(); ++j) CHECK(a(i, j) == 0.0);
    }
  }
  for (std::size_t j = 0; j < ids.size(); ++j) {
    auto changed = ids;
    changed[j] = (ids[j] + 3) % d.vocab;
    const Mat q = decoder_forward(rf, changed, m, d);
    for (std::size_t t = 0; t < j; ++t) CHECK((q.row(static_cast<int>(t)) - p.row(static_cast<int>(t))).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("zeroing the RF prefix changes the first text distribution") {
  const auto d = toy();
  auto m = init_params(d, 11);
  Rng rng(11);
  const Mat rf = random_mat(rng, 4, d.d_lm);
  const std::vector<int> ids = {3};
  const Mat a = decoder_forward(rf, ids, m, d);
  const Mat b = decoder_forward(Mat::Zero(4, d.d_lm), ids, m, d);
  CHECK((a - b).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("decoder input checks") {
  const auto d = toy();
  const auto m = init_params(d, 12);
  const Mat rf = Mat::Zero(60, d.d_lm);
  CHECK_THROWS_AS(decoder_forward(rf, std::vector<int>(10, 1), m, d), InputError);
  CHECK_THROWS_AS(decoder_forward(Mat::Zero(1, d.d_lm), {99}, m, d), InputError);
  CHECK_THROWS_AS(decoder_forward(Mat::Zero(1, d.d_lm), {}, m, d), InputError);
}

TEST_CASE("SFT loss") {
  const int v = 16, n = 5;
  const Mat uniform = Mat::Constant(n, v, 1.0 / v);
  const std::vector<int> targets = {1, 2, 3, 4, 5};
  CHECK(std::abs(sft_loss(uniform, targets, std::vector<bool>(n, true)) - n * std::log(16.0)) < 1e-9);
  CHECK(sft_loss(uniform, targets, std::vector<bool>(n, false)) == 0.0);
  Mat peaked = Mat::Constant(n, v, 1e-6);
  for (int t = 0; t < n; ++t) peaked(t, targets[t]) = 1.0 - 15e-6;
  CHECK(sft_loss(peaked, targets, std::vector<bool>(n, true)) < 1e-3);
  CHECK_THROWS_AS(sft_loss(uniform, targets, std::vector<bool>(3, true)), InputError);
  // Prompt positions contribute nothing.
  std::vector<bool> half = {false, false, true, true, true};
  CHECK(std::abs(sft_loss(uniform, targets, half) - 3 * std::log(16.0)) < 1e-12);
}

TEST_CASE("dims validation") {
  auto d = toy();
  d.q_heads = 3;
  CHECK_THROWS_AS(validate(d), ConfigError);
  d = toy();
  d.kv_heads = 8;
  CHECK_THROWS_AS(validate(d), ConfigError);
  d = toy();
  d.image_h = 9;
  CHECK_THROWS_AS(validate(d), ConfigError);
  nlohmann::json j = toy();
  CHECK(j.get<ModelDims>().d_ff == toy().d_ff);
}

TEST_CASE("tokenizer and greedy decoding") {
  ByteTokenizer tok;
  const auto ids = tok.encode("hi");
  CHECK(ids == std::vector<int>{ByteTokenizer::kBos, 'h', 'i'});
  CHECK(tok.decode(ids) == "hi");
  ModelDims d = toy();
  d.vocab = ByteTokenizer::kVocab;
  const auto m = init_params(d, 13);
  Rng rng(13);
  const auto out = greedy_decode(random_image(rng, 8, 8, 1), ids, m, d, 4);
  CHECK(out.size() >= ids.size() + 1);
  CHECK(out.size() <= ids.size() + 4);
  CHECK(greedy_decode(random_image(rng, 8, 8, 1), ids, m, d, 4).size() == out.size());
}

TEST_CASE("activation dumps are raw float64 with a sidecar") {
  const auto d = toy();
  const auto m = init_params(d, 14);
  Rng rng(14);
  Trace trace;
  trace.keep_activations = true;
  vit_forward(patchify(random_image(rng, 8, 8, 1), 2), m, d, &trace);
  REQUIRE(!trace.activations.empty());
  const auto dir = (std::filesystem::temp_directory_path() / "rfsynth_dump_test").string();
  std::filesystem::remove_all(dir);
  dump_activations(trace, dir);
  const auto& [name, mat] = trace.activations.front();
  const auto base = dir + "/000_" + name + ".f64";
  CHECK(std::filesystem::file_size(base) == static_cast<std::uintmax_t>(mat.size()) * 8);
  std::ifstream in(base, std::ios::binary);
  double first;
  in.read(reinterpret_cast<char*>(&first), 8);
  CHECK(first == mat(0, 0));
  std::filesystem::remove_all(dir);
}

TEST_CASE("property suite passes") {
  for (const auto& r : run_property_suite(21, 100)) CHECK_MESSAGE(r.passed, r.name << ": " << r.detail);
}
