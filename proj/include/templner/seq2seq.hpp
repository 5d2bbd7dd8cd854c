// Copyright 2026 The templner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "templner/nn.hpp"
#include "templner/pairs.hpp"
#include "templner/scorer.hpp"

namespace templner {

/// Whitespace-token vocabulary shared by encoder and decoder. Ids 0..3 are
/// the reserved <pad>, <unk>, <bos>, <eos>; the rest are sorted.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;

  Vocab();
  explicit Vocab(std::vector<std::string> tokens);  // specials are prepended

  static Vocab from_pairs(std::span<const TrainingPair> pairs, std::span<const std::string> extra = {});

  int id(const std::string& token) const;  // kUnk when absent
  bool contains(const std::string& token) const { return index_.count(token) > 0; }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

struct ModelConfig {
  int embed_dim = 64;
  int hidden_dim = 128;  // decoder width; each encoder direction gets half
  bool append_eos = true;
  // Zero output projection and bias: every step predicts the uniform
  // distribution until trained.
  bool zero_output = false;
  std::uint64_t seed = 0;
};

/// Every trainable tensor of the encoder-decoder. Vectors are stored as
/// single-column matrices so all tensors can be visited uniformly.
struct Seq2SeqParams {
  using Matrix = nn::Matrix<double>;

  Matrix embedding;  // |V| x E, one row per token
  nn::GruWeights<double> encoder_fwd;
  nn::GruWeights<double> encoder_bwd;
  Matrix bridge_w;  // H x H, encoder summary -> initial decoder state
  Matrix bridge_b;  // H x 1
  nn::GruWeights<double> decoder;
  Matrix query_w;   // D x H, D = H + E
  Matrix output_w;  // H x (H + D)
  Matrix output_b;  // H x 1
  Matrix lm_w;      // H x |V|
  Matrix lm_b;      // |V| x 1

  Seq2SeqParams() = default;
  Seq2SeqParams(int vocab_size, int embed_dim, int hidden_dim);

  /// Visits (name, tensor) in a fixed order.
  void for_each(const std::function<void(const std::string&, Matrix&)>& fn);
  void for_each(const std::function<void(const std::string&, const Matrix&)>& fn) const;

  void set_zero();
  std::size_t parameter_count() const;
};

enum class LossNormalization { kTokenMean, kSum };

/// A small recurrent encoder-decoder with attention that scores templates:
///   h_enc = BiGRU(embed(x)),  m_i = [h_enc_i; embed(x_i)]
///   s_c   = GRU(embed(t_{c-1}), s_{c-1}),  s_0 = tanh(W_b [f_n; b_1] + b_b)
///   ctx_c = Attention(m, W_q s_c)
///   p(t_c | t_<c, x) = softmax(W_lm^T tanh(W_o [s_c; ctx_c] + b_o) + b_lm)
class TinySeq2Seq : public GenerativeScorer {
 public:
  TinySeq2Seq() = default;
  TinySeq2Seq(Vocab vocab, ModelConfig config);

  bool initialized() const { return vocab_.size() > 0 && params_.embedding.size() > 0; }
  const Vocab& vocab() const { return vocab_; }
  const ModelConfig& config() const { return config_; }
  Seq2SeqParams& params() { return params_; }
  const Seq2SeqParams& params() const { return params_; }
  std::uint64_t steps_trained() const { return steps_trained_; }
  void add_steps_trained(std::uint64_t n) { steps_trained_ += n; }

  std::string describe() const override;

  /// Per-step output distributions (|V| x steps) under teacher forcing.
  Eigen::MatrixXd step_probabilities(std::span<const std::string> source, std::span<const std::string> target) const;

  /// Summed negative log-likelihood over `batch`, divided by the number of
  /// scored target tokens under kTokenMean.
  double loss(std::span<const TrainingPair> batch, LossNormalization norm = LossNormalization::kTokenMean) const;

  /// Same value as loss(); gradients are added into `grad` (which must have
  /// this model's shapes).
  double loss_and_gradient(std::span<const TrainingPair> batch, LossNormalization norm, Seq2SeqParams& grad) const;

  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;
  static TinySeq2Seq load(std::istream& in);
  static TinySeq2Seq load_file(const std::string& path);

  friend bool operator==(const TinySeq2Seq& a, const TinySeq2Seq& b);

 protected:
  std::vector<TargetScore> score_nonempty(std::span<const std::string> source,
                                          std::span<const Tokens> targets) const override;

 private:
  struct Encoded;
  struct DecodeTrace;

  void require_initialized() const;
  std::vector<int> ids(std::span<const std::string> tokens) const;
  std::vector<int> output_ids(std::span<const std::string> target) const;
  Encoded encode(const std::vector<int>& source) const;
  DecodeTrace decode(const Encoded& enc, const std::vector<int>& target_out, bool keep_trace) const;
  double backward(const std::vector<int>& source, const std::vector<int>& target_out, double weight,
                  Seq2SeqParams& grad) const;

  Vocab vocab_;
  ModelConfig config_;
  Seq2SeqParams params_;
  std::uint64_t steps_trained_ = 0;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace templner
