#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace rfsynth::model {

/// Row-major token convention: a sequence of n vectors of width d is an n x d
/// matrix and linear maps act on the right (X W).
using Mat = Eigen::MatrixXd;
using Vec = Eigen::RowVectorXd;

struct ModelDims {
  int patch = 14;      // P
  int channels = 1;    // C
  int image_h = 518;
  int image_w = 518;
  int d = 32;          // encoder width
  int layers = 2;      // L
  int heads = 4;       // H
  int enc_ff = 64;
  int d_lm = 32;
  int lm_layers = 2;   // L_LM
  int q_heads = 4;     // H_q
  int kv_heads = 2;    // H_k
  int head_dim = 8;    // d_k
  int d_ff = 64;
  int vocab = 259;     // V
  double eps = 1e-6;
  int max_len = 4096;
  bool rope = true;
  double rope_base = 10000.0;

  int num_patches() const { return (image_h / patch) * (image_w / patch); }
  int patch_len() const { return patch * patch * channels; }
};

/// Throws ConfigError unless H_q >= H_k, H_q % H_k == 0, every head count
/// divides its width, and the image sides are multiples of the patch size.
void validate(const ModelDims& dims);
void to_json(nlohmann::json& j, const ModelDims& d);
void from_json(const nlohmann::json& j, ModelDims& d);
ModelDims load_dims(const std::string& path);

/// Channels-last real image.
struct ImageTensor {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<double> data;
  double at(int y, int x, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
};

/// M = (H/P)(W/P) rows of length P*P*C; patches in row-major grid order,
/// each flattened row-major over (py, px, c). Throws InputError when a side
/// is not a multiple of P.
Mat patchify(const ImageTensor& img, int patch);

struct EncoderLayer {
  Vec ln1_g, ln1_b, ln2_g, ln2_b;
  Mat wq, wk, wv, wo;  // d x d
  Mat w1;              // d x enc_ff
  Vec b1;
  Mat w2;              // enc_ff x d
  Vec b2;
};

struct DecoderLayer {
  Vec rms1, rms2;
  Mat wq;  // d_lm x H_q d_k
  Mat wk;  // d_lm x H_k d_k
  Mat wv;  // d_lm x H_k d_k
  Mat wo;  // H_q d_k x d_lm
  Mat w_up, w_gate;  // d_lm x d_ff
  Vec b_up, b_gate;
  Mat w_down;        // d_ff x d_lm
  Vec b_down;
};

struct ModelParams {
  Mat embed;  // P^2 C x d
  Mat pos;    // M x d
  std::vector<EncoderLayer> encoder;
  Mat w_proj;  // d x d_lm
  Vec b_proj;
  Mat tok;     // V x d_lm
  std::vector<DecoderLayer> decoder;
  Vec final_rms;
  Mat w_out;   // d_lm x V
};

/// Weights uniform in [-0.02, 0.02]; norm scales 1, LayerNorm shifts 0.
ModelParams init_params(const ModelDims& dims, std::uint64_t seed);

/// Row-wise normalizers and activations.
Mat layer_norm(const Mat& x, const Vec& g, const Vec& b, double eps);
Vec rmsnorm(const Vec& x, const Vec& g, double eps);
Mat rmsnorm_rows(const Mat& x, const Vec& g, double eps);
Mat gelu(const Mat& x);
Mat silu(const Mat& x);
/// Row-wise softmax; entries equal to -inf get probability 0.
Mat softmax_rows(const Mat& x);

/// Query head h (0-based) reads key-value group floor(h / (H_q / H_k)).
int gqa_group(int h, int q_heads, int kv_heads);

/// Collected attention probabilities (one matrix per layer and head) and
/// optional per-layer hidden states, for property checks and dumps.
struct Trace {
  std::vector<Mat> attention;
  std::vector<std::pair<std::string, Mat>> activations;
  bool keep_activations = false;
};

/// Bidirectional multi-head attention over rows of x.
Mat mha(const Mat& x, const Mat& wq, const Mat& wk, const Mat& wv, const Mat& wo, int heads, Trace* trace = nullptr);

/// Rotates consecutive pairs of each head_dim block by position-dependent
/// angles; position of row i is offset + i.
Mat apply_rope(const Mat& x, int head_dim, int offset, double base);

/// Causal grouped-query attention: additive -inf mask above the diagonal.
Mat gqa_causal(const Mat& u, const DecoderLayer& layer, const ModelDims& dims, Trace* trace = nullptr);

/// (silu(X W_gate + b_gate) * (X W_up + b_up)) W_down + b_down.
Mat gated_mlp(const Mat& x, const DecoderLayer& layer);

/// Patches -> E x + p -> L pre-norm blocks (attention then MLP, residual).
Mat vit_forward(const Mat& patches, const ModelParams& params, const ModelDims& dims, Trace* trace = nullptr);
Mat adapter(const Mat& h, const Mat& w_proj, const Vec& b_proj);

/// N x V next-token distributions for the text positions. The RF tokens are
/// a prefix; positions are contiguous over prefix and text. Throws
/// InputError when M + N exceeds max_len or an id is outside the vocab.
Mat decoder_forward(const Mat& rf_tokens, const std::vector<int>& text_ids, const ModelParams& params,
                    const ModelDims& dims, Trace* trace = nullptr);

/// Row t of `probs` is the distribution for targets[t]; sums -log p over
/// masked positions. Throws InputError on length mismatch.
double sft_loss(const Mat& probs, const std::vector<int>& targets, const std::vector<bool>& mask);

/// Byte-level toy vocabulary: ids 0-255 are bytes, then BOS, EOS, PAD.
struct ByteTokenizer {
  static constexpr int kBos = 256;
  static constexpr int kEos = 257;
  static constexpr int kPad = 258;
  static constexpr int kVocab = 259;
  std::vector<int> encode(const std::string& text, bool bos = true) const;
  std::string decode(const std::vector<int>& ids) const;
};

/// Greedy continuation of `prompt` until EOS or max_new tokens.
std::vector<int> greedy_decode(const ImageTensor& img, const std::vector<int>& prompt, const ModelParams& params,
                               const ModelDims& dims, int max_new);

/// Raw little-endian float64 matrix per activation plus a JSON sidecar.
void dump_activations(const Trace& trace, const std::string& dir);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Seeded property checks at toy dimensions: attention row sums, causality,
/// GQA/MHA equivalence, RMSNorm scale, uniform-loss value, patch count law.
std::vector<CheckResult> run_property_suite(std::uint64_t seed, int trials = 100);

}  // namespace rfsynth::model
