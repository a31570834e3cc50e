#include "rfsynth/model/model.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "rfsynth/core/error.hpp"
#include "rfsynth/core/rng.hpp"

namespace rfsynth::model {

namespace {

Mat uniform_mat(Rng& rng, int rows, int cols) {
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-0.02, 0.02);
  return m;
}

Vec uniform_vec(Rng& rng, int n) { return uniform_mat(rng, 1, n); }

Vec constant_vec(int n, double v) { return Vec::Constant(n, v); }

Mat add_row(Mat x, const Vec& b) {
  x.rowwise() += b;
  return x;
}

void record(Trace* t, const std::string& name, const Mat& m) {
  if (t && t->keep_activations) t->activations.emplace_back(name, m);
}

/// Softmax over the first `len` entries of each row; the rest are masked.
Mat masked_softmax(const Mat& scores, bool causal) {
  Mat p = Mat::Zero(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const Eigen::Index len = causal ? i + 1 : scores.cols();
    const double mx = scores.row(i).head(len).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < len; ++j) sum += p(i, j) = std::exp(scores(i, j) - mx);
    p.row(i).head(len) /= sum;
  }
  return p;
}

Mat encoder_mlp(const Mat& x, const EncoderLayer& l) { return add_row(gelu(add_row(x * l.w1, l.b1)) * l.w2, l.b2); }

}  // namespace

void validate(const ModelDims& d) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("model dims: " + what);
  };
  need(d.patch > 0 && d.channels > 0 && d.image_h > 0 && d.image_w > 0, "patch, channels and image sides must be positive");
  need(d.image_h % d.patch == 0 && d.image_w % d.patch == 0, "image sides must be multiples of the patch size");
  need(d.d > 0 && d.heads > 0 && d.d % d.heads == 0, "encoder heads must divide d");
  need(d.layers >= 0 && d.lm_layers >= 0, "layer counts must be non-negative");
  need(d.q_heads >= d.kv_heads && d.kv_heads > 0 && d.q_heads % d.kv_heads == 0, "need H_q >= H_k and H_q % H_k == 0");
  need(d.head_dim > 0 && (!d.rope || d.head_dim % 2 == 0), "head_dim must be positive and even with RoPE");
  need(d.d_lm > 0 && d.d_ff > 0 && d.enc_ff > 0 && d.vocab > 0, "widths and vocab must be positive");
  need(d.eps > 0, "eps must be positive");
}

void to_json(nlohmann::json& j, const ModelDims& d) {
  j = {{"patch", d.patch},     {"channels", d.channels}, {"image_h", d.image_h},     {"image_w", d.image_w},
       {"d", d.d},             {"layers", d.layers},     {"heads", d.heads},         {"enc_ff", d.enc_ff},
       {"d_lm", d.d_lm},       {"lm_layers", d.lm_layers}, {"q_heads", d.q_heads},   {"kv_heads", d.kv_heads},
       {"head_dim", d.head_dim}, {"d_ff", d.d_ff},       {"vocab", d.vocab},         {"eps", d.eps},
       {"max_len", d.max_len}, {"rope", d.rope},         {"rope_base", d.rope_base}};
}

void from_json(const nlohmann::json& j, ModelDims& d) {
  ModelDims def;
  d.patch = j.value("patch", def.patch);
  d.channels = j.value("channels", def.channels);
  d.image_h = j.value("image_h", def.image_h);
  d.image_w = j.value("image_w", def.image_w);
  d.d = j.value("d", def.d);
  d.layers = j.value("layers", def.layers);
  d.heads = j.value("heads", def.heads);
  d.enc_ff = j.value("enc_ff", def.enc_ff);
  d.d_lm = j.value("d_lm", def.d_lm);
  d.lm_layers = j.value("lm_layers", def.lm_layers);
  d.q_heads = j.value("q_heads", def.q_heads);
  d.kv_heads = j.value("kv_heads", def.kv_heads);
  d.head_dim = j.value("head_dim", def.head_dim);
  d.d_ff = j.value("d_ff", def.d_ff);
  d.vocab = j.value("vocab", def.vocab);
  d.eps = j.value("eps", def.eps);
  d.max_len = j.value("max_len", def.max_len);
  d.rope = j.value("rope", def.rope);
  d.rope_base = j.value("rope_base", def.rope_base);
}

ModelDims load_dims(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model config '" + path + "'");
  auto d = nlohmann::json::parse(in).get<ModelDims>();
  validate(d);
  return d;
}

Mat patchify(const ImageTensor& img, int p) {
  if (p <= 0 || img.height % p != 0 || img.width % p != 0)
    throw InputError("image " + std::to_string(img.height) + "x" + std::to_string(img.width) +
                     " is not divisible into " + std::to_string(p) + "-pixel patches");
  if (img.data.size() != static_cast<std::size_t>(img.height) * img.width * img.channels)
    throw InputError("image buffer does not match its dimensions");
  const int gh = img.height / p, gw = img.width / p, c = img.channels;
  Mat out(gh * gw, p * p * c);
  for (int py = 0; py < gh; ++py)
    for (int px = 0; px < gw; ++px) {
      const int row = py * gw + px;
      int col = 0;
      for (int y = 0; y < p; ++y)
        for (int x = 0; x < p; ++x)
          for (int ch = 0; ch < c; ++ch) out(row, col++) = img.at(py * p + y, px * p + x, ch);
    }
  return out;
}

ModelParams init_params(const ModelDims& d, std::uint64_t seed) {
  validate(d);
  Rng rng(derive_seed(seed, "model-init"));
  ModelParams m;
  m.embed = uniform_mat(rng, d.patch_len(), d.d);
  m.pos = uniform_mat(rng, d.num_patches(), d.d);
  for (int l = 0; l < d.layers; ++l) {
    EncoderLayer e;
    e.ln1_g = constant_vec(d.d, 1.0);
    e.ln1_b = constant_vec(d.d, 0.0);
    e.ln2_g = constant_vec(d.d, 1.0);
    e.ln2_b = constant_vec(d.d, 0.0);
    e.wq = uniform_mat(rng, d.d, d.d);
    e.wk = uniform_mat(rng, d.d, d.d);
    e.wv = uniform_mat(rng, d.d, d.d);
    e.wo = uniform_mat(rng, d.d, d.d);
    e.w1 = uniform_mat(rng, d.d, d.enc_ff);
    e.b1 = uniform_vec(rng, d.enc_ff);
    e.w2 = uniform_mat(rng, d.enc_ff, d.d);
    e.b2 = uniform_vec(rng, d.d);
    m.encoder.push_back(std::move(e));
  }
  m.w_proj = uniform_mat(rng, d.d, d.d_lm);
  m.b_proj = uniform_vec(rng, d.d_lm);
  m.tok = uniform_mat(rng, d.vocab, d.d_lm);
  for (int l = 0; l < d.lm_layers; ++l) {
    DecoderLayer x;
    x.rms1 = constant_vec(d.d_lm, 1.0);
    x.rms2 = constant_vec(d.d_lm, 1.0);
    x.wq = uniform_mat(rng, d.d_lm, d.q_heads * d.head_dim);
    x.wk = uniform_mat(rng, d.d_lm, d.kv_heads * d.head_dim);
    x.wv = uniform_mat(rng, d.d_lm, d.kv_heads * d.head_dim);
    x.wo = uniform_mat(rng, d.q_heads * d.head_dim, d.d_lm);
    x.w_up = uniform_mat(rng, d.d_lm, d.d_ff);
    x.w_gate = uniform_mat(rng, d.d_lm, d.d_ff);
    x.b_up = uniform_vec(rng, d.d_ff);
    x.b_gate = uniform_vec(rng, d.d_ff);
    x.w_down = uniform_mat(rng, d.d_ff, d.d_lm);
    x.b_down = uniform_vec(rng, d.d_lm);
    m.decoder.push_back(std::move(x));
  }
  m.final_rms = constant_vec(d.d_lm, 1.0);
  m.w_out = uniform_mat(rng, d.d_lm, d.vocab);
  return m;
}

Mat layer_norm(const Mat& x, const Vec& g, const Vec& b, double eps) {
  Mat out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).mean();
    const Vec c = x.row(i).array() - mean;
    const double var = c.squaredNorm() / static_cast<double>(x.cols());
    out.row(i) = (c / std::sqrt(var + eps)).cwiseProduct(g) + b;
  }
  return out;
}

Vec rmsnorm(const Vec& x, const Vec& g, double eps) {
  const double ms = x.squaredNorm() / static_cast<double>(x.size());
  return (x / std::sqrt(ms + eps)).cwiseProduct(g);
}

Mat rmsnorm_rows(const Mat& x, const Vec& g, double eps) {
  Mat out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.row(i) = rmsnorm(x.row(i), g, eps);
  return out;
}

Mat gelu(const Mat& x) {
  return x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0))); });
}

Mat silu(const Mat& x) {
  return x.unaryExpr([](double v) { return v / (1.0 + std::exp(-v)); });
}

Mat softmax_rows(const Mat& x) {
  Mat p(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mx = x.row(i).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      p(i, j) = std::isinf(x(i, j)) && x(i, j) < 0 ? 0.0 : std::exp(x(i, j) - mx);
      sum += p(i, j);
    }
    p.row(i) /= sum;
  }
  return p;
}

int gqa_group(int h, int q_heads, int kv_heads) { return h / (q_heads / kv_heads); }

Mat mha(const Mat& x, const Mat& wq, const Mat& wk, const Mat& wv, const Mat& wo, int heads, Trace* trace) {
  const Mat q = x * wq, k = x * wk, v = x * wv;
  const int dh = static_cast<int>(q.cols()) / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Mat cat(x.rows(), q.cols());
  for (int h = 0; h < heads; ++h) {
    const Mat p = masked_softmax(q.middleCols(h * dh, dh) * k.middleCols(h * dh, dh).transpose() * scale, false);
    if (trace) trace->attention.push_back(p);
    cat.middleCols(h * dh, dh) = p * v.middleCols(h * dh, dh);
  }
  return cat * wo;
}

Mat apply_rope(const Mat& x, int head_dim, int offset, double base) {
  Mat out = x;
  const int blocks = static_cast<int>(x.cols()) / head_dim;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double pos = static_cast<double>(offset + r);
    for (int i = 0; i < head_dim / 2; ++i) {
      const double theta = pos * std::pow(base, -2.0 * i / head_dim);
      const double c = std::cos(theta), s = std::sin(theta);
      for (int b = 0; b < blocks; ++b) {
        const int j = b * head_dim + 2 * i;
        out(r, j) = x(r, j) * c - x(r, j + 1) * s;
        out(r, j + 1) = x(r, j) * s + x(r, j + 1) * c;
      }
    }
  }
  return out;
}

Mat gqa_causal(const Mat& u, const DecoderLayer& l, const ModelDims& d, Trace* trace) {
  Mat q = u * l.wq, k = u * l.wk;
  const Mat v = u * l.wv;
  if (d.rope) {
    q = apply_rope(q, d.head_dim, 0, d.rope_base);
    k = apply_rope(k, d.head_dim, 0, d.rope_base);
  }
  const int dk = d.head_dim;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  Mat cat(u.rows(), d.q_heads * dk);
  for (int h = 0; h < d.q_heads; ++h) {
    const int g = gqa_group(h, d.q_heads, d.kv_heads);
    const Mat p = masked_softmax(q.middleCols(h * dk, dk) * k.middleCols(g * dk, dk).transpose() * scale, true);
    if (trace) trace->attention.push_back(p);
    cat.middleCols(h * dk, dk) = p * v.middleCols(g * dk, dk);
  }
  return cat * l.wo;
}

Mat gated_mlp(const Mat& x, const DecoderLayer& l) {
  const Mat gate = silu(add_row(x * l.w_gate, l.b_gate));
  const Mat up = add_row(x * l.w_up, l.b_up);
  return add_row(gate.cwiseProduct(up) * l.w_down, l.b_down);
}

Mat vit_forward(const Mat& patches, const ModelParams& m, const ModelDims& d, Trace* trace) {
  if (patches.cols() != m.embed.rows() || patches.rows() != m.pos.rows())
    throw InputError("patch matrix does not match the model's patch length or token count");
  Mat z = patches * m.embed + m.pos;
  record(trace, "encoder.embed", z);
  for (std::size_t l = 0; l < m.encoder.size(); ++l) {
    const auto& e = m.encoder[l];
    const Mat a = layer_norm(z, e.ln1_g, e.ln1_b, d.eps);
    z += mha(a, e.wq, e.wk, e.wv, e.wo, d.heads, trace);
    z += encoder_mlp(layer_norm(z, e.ln2_g, e.ln2_b, d.eps), e);
    record(trace, "encoder." + std::to_string(l), z);
  }
  return z;
}

Mat adapter(const Mat& h, const Mat& w_proj, const Vec& b_proj) { return add_row(h * w_proj, b_proj); }

Mat decoder_forward(const Mat& rf, const std::vector<int>& ids, const ModelParams& m, const ModelDims& d,
                    Trace* trace) {
  const auto n_rf = rf.rows();
  const auto n = static_cast<Eigen::Index>(ids.size());
  if (n == 0) throw InputError("decoder needs at least one text token");
  if (n_rf + n > d.max_len)
    throw InputError("sequence of " + std::to_string(n_rf + n) + " tokens exceeds max_len " + std::to_string(d.max_len));
  if (rf.cols() != d.d_lm) throw InputError("RF tokens must have width d_lm");
  Mat x(n_rf + n, d.d_lm);
  x.topRows(n_rf) = rf;
  for (Eigen::Index t = 0; t < n; ++t) {
    const int id = ids[static_cast<std::size_t>(t)];
    if (id < 0 || id >= d.vocab) throw InputError("token id " + std::to_string(id) + " outside the vocabulary");
    x.row(n_rf + t) = m.tok.row(id);
  }
  for (std::size_t l = 0; l < m.decoder.size(); ++l) {
    const auto& layer = m.decoder[l];
    x += gqa_causal(rmsnorm_rows(x, layer.rms1, d.eps), layer, d, trace);
    x += gated_mlp(rmsnorm_rows(x, layer.rms2, d.eps), layer);
    record(trace, "decoder." + std::to_string(l), x);
  }
  const Mat logits = rmsnorm_rows(x.bottomRows(n), m.final_rms, d.eps) * m.w_out;
  record(trace, "logits", logits);
  return softmax_rows(logits);
}

double sft_loss(const Mat& probs, const std::vector<int>& targets, const std::vector<bool>& mask) {
  if (targets.size() != mask.size() || static_cast<Eigen::Index>(targets.size()) != probs.rows())
    throw InputError("targets, mask and distributions must have the same length");
  double loss = 0.0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (!mask[t]) continue;
    if (targets[t] < 0 || targets[t] >= probs.cols()) throw InputError("target id outside the vocabulary");
    loss -= std::log(probs(static_cast<Eigen::Index>(t), targets[t]));
  }
  return loss;
}

std::vector<int> ByteTokenizer::encode(const std::string& text, bool bos) const {
  std::vector<int> ids;
  if (bos) ids.push_back(kBos);
  for (unsigned char c : text) ids.push_back(c);
  return ids;
}

std::string ByteTokenizer::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids)
    if (id >= 0 && id < 256) out.push_back(static_cast<char>(id));
  return out;
}

std::vector<int> greedy_decode(const ImageTensor& img, const std::vector<int>& prompt, const ModelParams& m,
                               const ModelDims& d, int max_new) {
  const Mat rf = adapter(vit_forward(patchify(img, d.patch), m, d), m.w_proj, m.b_proj);
  std::vector<int> ids = prompt;
  for (int i = 0; i < max_new; ++i) {
    const Mat p = decoder_forward(rf, ids, m, d);
    Eigen::Index best;
    p.row(p.rows() - 1).maxCoeff(&best);
    ids.push_back(static_cast<int>(best));
    if (best == ByteTokenizer::kEos) break;
  }
  return ids;
}

void dump_activations(const Trace& trace, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
  for (std::size_t i = 0; i < trace.activations.size(); ++i) {
    const auto& [name, mat] = trace.activations[i];
    char stem[16];
    std::snprintf(stem, sizeof stem, "%03zu_", i);
    const auto base = (fs::path(dir) / (stem + name)).string();
    std::ofstream out(base + ".f64", std::ios::binary);
    for (Eigen::Index r = 0; r < mat.rows(); ++r)
      for (Eigen::Index c = 0; c < mat.cols(); ++c) {
        const double v = mat(r, c);
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
      }
    std::ofstream side(base + ".f64.json");
    side << nlohmann::json{{"name", name}, {"rows", mat.rows()}, {"cols", mat.cols()}, {"dtype", "float64"},
                           {"order", "row-major"}, {"endian", "little"}}
                .dump(2)
         << "\n";
    if (!out || !side) throw IoError("cannot write activation dump '" + base + "'");
  }
}

}  // namespace rfsynth::model
