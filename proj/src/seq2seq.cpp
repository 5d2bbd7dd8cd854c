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

#include "templner/seq2seq.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "templner/error.hpp"

namespace templner {
namespace {

using Matrix = nn::Matrix<double>;
using Vector = nn::Vector<double>;

const std::vector<std::string> kSpecials = {"<pad>", "<unk>", "<bos>", "<eos>"};

// Portable uniform draw in [-scale, scale): uses only the raw engine output,
// so initial weights do not depend on the standard library's distributions.
void uniform_fill(Matrix& m, std::mt19937_64& rng, double scale) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      m(i, j) = (2.0 * unit - 1.0) * scale;
    }
}

double fan_in_scale(const Matrix& m) { return 1.0 / std::sqrt(static_cast<double>(m.cols())); }

}  // namespace

// ---------------------------------------------------------------------------
// Vocab

Vocab::Vocab() : Vocab(std::vector<std::string>{}) {}

Vocab::Vocab(std::vector<std::string> tokens) {
  tokens_ = kSpecials;
  std::set<std::string> rest(tokens.begin(), tokens.end());
  for (const auto& s : kSpecials) rest.erase(s);
  tokens_.insert(tokens_.end(), rest.begin(), rest.end());
  for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], static_cast<int>(i));
}

Vocab Vocab::from_pairs(std::span<const TrainingPair> pairs, std::span<const std::string> extra) {
  std::vector<std::string> tokens(extra.begin(), extra.end());
  for (const auto& p : pairs) {
    tokens.insert(tokens.end(), p.source.begin(), p.source.end());
    tokens.insert(tokens.end(), p.target.begin(), p.target.end());
  }
  return Vocab(std::move(tokens));
}

int Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

// ---------------------------------------------------------------------------
// Parameters

Seq2SeqParams::Seq2SeqParams(int vocab_size, int embed_dim, int hidden_dim) {
  if (vocab_size <= 0 || embed_dim <= 0 || hidden_dim <= 0 || hidden_dim % 2 != 0)
    throw ValueError("invalid model dimensions (hidden_dim must be a positive even number)");
  const int half = hidden_dim / 2;
  const int memory_dim = hidden_dim + embed_dim;  // [forward; backward; embedding]
  embedding = Matrix::Zero(vocab_size, embed_dim);
  encoder_fwd = nn::GruWeights<double>(embed_dim, half);
  encoder_bwd = nn::GruWeights<double>(embed_dim, half);
  bridge_w = Matrix::Zero(hidden_dim, hidden_dim);
  bridge_b = Matrix::Zero(hidden_dim, 1);
  decoder = nn::GruWeights<double>(embed_dim, hidden_dim);
  query_w = Matrix::Zero(memory_dim, hidden_dim);
  output_w = Matrix::Zero(hidden_dim, hidden_dim + memory_dim);
  output_b = Matrix::Zero(hidden_dim, 1);
  lm_w = Matrix::Zero(hidden_dim, vocab_size);
  lm_b = Matrix::Zero(vocab_size, 1);
}

void Seq2SeqParams::for_each(const std::function<void(const std::string&, Matrix&)>& fn) {
  fn("embedding", embedding);
  fn("encoder_fwd.input", encoder_fwd.input);
  fn("encoder_fwd.recurrent", encoder_fwd.recurrent);
  fn("encoder_fwd.bias", encoder_fwd.bias);
  fn("encoder_bwd.input", encoder_bwd.input);
  fn("encoder_bwd.recurrent", encoder_bwd.recurrent);
  fn("encoder_bwd.bias", encoder_bwd.bias);
  fn("bridge.weight", bridge_w);
  fn("bridge.bias", bridge_b);
  fn("decoder.input", decoder.input);
  fn("decoder.recurrent", decoder.recurrent);
  fn("decoder.bias", decoder.bias);
  fn("attention.query", query_w);
  fn("output.weight", output_w);
  fn("output.bias", output_b);
  fn("lm.weight", lm_w);
  fn("lm.bias", lm_b);
}

void Seq2SeqParams::for_each(const std::function<void(const std::string&, const Matrix&)>& fn) const {
  const_cast<Seq2SeqParams*>(this)->for_each(
      [&](const std::string& name, Matrix& m) { fn(name, static_cast<const Matrix&>(m)); });
}

void Seq2SeqParams::set_zero() {
  for_each([](const std::string&, Matrix& m) { m.setZero(); });
}

std::size_t Seq2SeqParams::parameter_count() const {
  std::size_t n = 0;
  for_each([&](const std::string&, const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

// ---------------------------------------------------------------------------
// Model

struct TinySeq2Seq::Encoded {
  std::vector<nn::GruStep<double>> fwd, bwd;
  Matrix memory;  // D x n
  Vector summary;
  Vector initial_state;
};

struct TinySeq2Seq::DecodeTrace {
  std::vector<nn::GruStep<double>> steps;
  std::vector<Vector> queries;
  std::vector<nn::AttentionStep<double>> attention;
  std::vector<Vector> features;  // [s_c; ctx_c]
  std::vector<Vector> hidden;    // tanh(W_o features + b_o)
  std::vector<Vector> log_probs;
  std::vector<double> target_logprobs;
};

TinySeq2Seq::TinySeq2Seq(Vocab vocab, ModelConfig config)
    : vocab_(std::move(vocab)),
      config_(config),
      params_(vocab_.size(), config.embed_dim, config.hidden_dim) {
  std::mt19937_64 rng(config.seed);
  params_.for_each([&](const std::string& name, Matrix& m) {
    if (name.ends_with("bias")) return;
    if (config_.zero_output && name == "lm.weight") return;
    uniform_fill(m, rng, name == "embedding" ? 1.0 : fan_in_scale(m));
  });
}

std::string TinySeq2Seq::describe() const {
  std::ostringstream out;
  out << "tiny-seq2seq(vocab=" << vocab_.size() << ", embed=" << config_.embed_dim
      << ", hidden=" << config_.hidden_dim << ", eos=" << (config_.append_eos ? "on" : "off") << ")";
  return out.str();
}

void TinySeq2Seq::require_initialized() const {
  if (!initialized()) throw ScorerError("model is not initialized");
}

std::vector<int> TinySeq2Seq::ids(std::span<const std::string> tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(vocab_.id(t));
  return out;
}

std::vector<int> TinySeq2Seq::output_ids(std::span<const std::string> target) const {
  auto out = ids(target);
  if (config_.append_eos) out.push_back(Vocab::kEos);
  return out;
}

TinySeq2Seq::Encoded TinySeq2Seq::encode(const std::vector<int>& source) const {
  const auto n = source.size();
  const Eigen::Index half = params_.encoder_fwd.hidden_dim();
  Encoded enc;
  const Eigen::Index E = params_.embedding.cols();
  enc.memory = Matrix::Zero(2 * half + E, static_cast<Eigen::Index>(std::max<std::size_t>(n, 1)));
  if (n == 0) {
    // A sentence is never empty in practice; an all-zero memory keeps the
    // computation total.
    enc.summary = Vector::Zero(2 * half);
  } else {
    enc.fwd.resize(n);
    enc.bwd.resize(n);
    Vector h = Vector::Zero(half);
    for (std::size_t i = 0; i < n; ++i) {
      enc.fwd[i] = nn::gru_forward(params_.encoder_fwd, params_.embedding.row(source[i]).transpose(), h);
      h = enc.fwd[i].h;
      enc.memory.col(static_cast<Eigen::Index>(i)).head(half) = h;
      enc.memory.col(static_cast<Eigen::Index>(i)).tail(E) = params_.embedding.row(source[i]).transpose();
    }
    h = Vector::Zero(half);
    for (std::size_t k = n; k-- > 0;) {
      enc.bwd[k] = nn::gru_forward(params_.encoder_bwd, params_.embedding.row(source[k]).transpose(), h);
      h = enc.bwd[k].h;
      enc.memory.col(static_cast<Eigen::Index>(k)).segment(half, half) = h;
    }
    enc.summary.resize(2 * half);
    enc.summary << enc.fwd.back().h, enc.bwd.front().h;
  }
  enc.initial_state = (params_.bridge_w * enc.summary + params_.bridge_b).array().tanh().matrix();
  return enc;
}

TinySeq2Seq::DecodeTrace TinySeq2Seq::decode(const Encoded& enc, const std::vector<int>& target_out,
                                             bool keep_trace) const {
  const Eigen::Index H = params_.decoder.hidden_dim();
  const Eigen::Index D = enc.memory.rows();
  DecodeTrace trace;
  trace.target_logprobs.reserve(target_out.size());
  Vector state = enc.initial_state;
  Vector features(H + D);
  for (std::size_t c = 0; c < target_out.size(); ++c) {
    const int input = c == 0 ? Vocab::kBos : target_out[c - 1];
    auto step = nn::gru_forward(params_.decoder, params_.embedding.row(input).transpose(), state);
    Vector query = params_.query_w * step.h;
    auto attn = nn::attention_forward(enc.memory, query);
    features << step.h, attn.context;
    Vector hidden = (params_.output_w * features + params_.output_b).array().tanh().matrix();
    Vector logits = params_.lm_w.transpose() * hidden + params_.lm_b;
    Vector log_probs = nn::log_softmax(logits);
    trace.target_logprobs.push_back(log_probs(target_out[c]));
    state = step.h;
    if (keep_trace) {
      trace.steps.push_back(std::move(step));
      trace.queries.push_back(std::move(query));
      trace.attention.push_back(std::move(attn));
      trace.features.push_back(features);
      trace.hidden.push_back(std::move(hidden));
      trace.log_probs.push_back(std::move(log_probs));
    }
  }
  return trace;
}

std::vector<TargetScore> TinySeq2Seq::score_nonempty(std::span<const std::string> source,
                                                     std::span<const Tokens> targets) const {
  require_initialized();
  const Encoded enc = encode(ids(source));
  std::vector<TargetScore> out;
  out.reserve(targets.size());
  for (const auto& target : targets)
    out.push_back(make_target_score(decode(enc, output_ids(target), false).target_logprobs));
  return out;
}

Eigen::MatrixXd TinySeq2Seq::step_probabilities(std::span<const std::string> source,
                                                std::span<const std::string> target) const {
  require_initialized();
  const auto out_ids = output_ids(target);
  const auto trace = decode(encode(ids(source)), out_ids, true);
  Eigen::MatrixXd probs(vocab_.size(), static_cast<Eigen::Index>(out_ids.size()));
  for (std::size_t c = 0; c < out_ids.size(); ++c)
    probs.col(static_cast<Eigen::Index>(c)) = trace.log_probs[c].array().exp().matrix();
  return probs;
}

double TinySeq2Seq::backward(const std::vector<int>& source, const std::vector<int>& target_out, double weight,
                             Seq2SeqParams& grad) const {
  const Encoded enc = encode(source);
  const DecodeTrace trace = decode(enc, target_out, true);
  const Eigen::Index H = params_.decoder.hidden_dim();
  const Eigen::Index D = enc.memory.rows();
  const Eigen::Index half = params_.encoder_fwd.hidden_dim();

  double nll = 0.0;
  for (double lp : trace.target_logprobs) nll -= lp;

  Matrix dmemory = Matrix::Zero(enc.memory.rows(), enc.memory.cols());
  Vector dstate = Vector::Zero(H);  // gradient flowing into s_c from step c+1
  Vector dx, dh_prev;
  for (std::size_t c = target_out.size(); c-- > 0;) {
    // d(-w log p_y)/dlogits = w (p - onehot(y))
    Vector dlogits = trace.log_probs[c].array().exp().matrix() * weight;
    dlogits(target_out[c]) -= weight;
    grad.lm_w.noalias() += trace.hidden[c] * dlogits.transpose();
    grad.lm_b += dlogits;
    Vector dhidden = params_.lm_w * dlogits;
    Vector dpre = dhidden.array() * (1.0 - trace.hidden[c].array().square());
    grad.output_w.noalias() += dpre * trace.features[c].transpose();
    grad.output_b += dpre;
    Vector dfeatures = params_.output_w.transpose() * dpre;

    Vector dcontext = dfeatures.tail(D);
    Vector dquery = nn::attention_backward(enc.memory, trace.queries[c], trace.attention[c], dcontext, dmemory);
    grad.query_w.noalias() += dquery * trace.steps[c].h.transpose();

    Vector dh = dstate + dfeatures.head(H);
    dh.noalias() += params_.query_w.transpose() * dquery;
    const int input = c == 0 ? Vocab::kBos : target_out[c - 1];
    nn::gru_backward(params_.decoder, trace.steps[c], params_.embedding.row(input).transpose(), dh, grad.decoder,
                     dx, dh_prev);
    grad.embedding.row(input) += dx.transpose();
    dstate = dh_prev;
  }

  // s_0 = tanh(W_b summary + b_b)
  Vector dbridge = dstate.array() * (1.0 - enc.initial_state.array().square());
  grad.bridge_w.noalias() += dbridge * enc.summary.transpose();
  grad.bridge_b += dbridge;
  Vector dsummary = params_.bridge_w.transpose() * dbridge;

  const std::size_t n = source.size();
  if (n == 0) return nll;
  dmemory.col(static_cast<Eigen::Index>(n - 1)).head(half) += dsummary.head(half);
  dmemory.col(0).segment(half, half) += dsummary.tail(half);

  Vector carry = Vector::Zero(half);
  for (std::size_t i = n; i-- > 0;) {
    Vector dh = carry + dmemory.col(static_cast<Eigen::Index>(i)).head(half);
    nn::gru_backward(params_.encoder_fwd, enc.fwd[i], params_.embedding.row(source[i]).transpose(), dh,
                     grad.encoder_fwd, dx, dh_prev);
    grad.embedding.row(source[i]) += dx.transpose();
    carry = dh_prev;
  }
  const Eigen::Index E = params_.embedding.cols();
  for (std::size_t i = 0; i < n; ++i)
    grad.embedding.row(source[i]) += dmemory.col(static_cast<Eigen::Index>(i)).tail(E).transpose();
  carry.setZero();
  for (std::size_t i = 0; i < n; ++i) {
    Vector dh = carry + dmemory.col(static_cast<Eigen::Index>(i)).segment(half, half);
    nn::gru_backward(params_.encoder_bwd, enc.bwd[i], params_.embedding.row(source[i]).transpose(), dh,
                     grad.encoder_bwd, dx, dh_prev);
    grad.embedding.row(source[i]) += dx.transpose();
    carry = dh_prev;
  }
  return nll;
}

namespace {

std::size_t scored_tokens(std::span<const TrainingPair> batch, bool append_eos) {
  std::size_t n = 0;
  for (const auto& p : batch) n += p.target.size() + (append_eos ? 1 : 0);
  return n;
}

}  // namespace

double TinySeq2Seq::loss(std::span<const TrainingPair> batch, LossNormalization norm) const {
  require_initialized();
  if (batch.empty()) throw ValueError("loss of an empty batch");
  double nll = 0.0;
  for (const auto& p : batch) {
    const auto out_ids = output_ids(p.target);
    if (out_ids.empty()) continue;
    for (double lp : decode(encode(ids(p.source)), out_ids, false).target_logprobs) nll -= lp;
  }
  if (norm == LossNormalization::kTokenMean) nll /= static_cast<double>(scored_tokens(batch, config_.append_eos));
  return nll;
}

double TinySeq2Seq::loss_and_gradient(std::span<const TrainingPair> batch, LossNormalization norm,
                                      Seq2SeqParams& grad) const {
  require_initialized();
  if (batch.empty()) throw ValueError("loss of an empty batch");
  const std::size_t tokens = scored_tokens(batch, config_.append_eos);
  const double weight = norm == LossNormalization::kTokenMean ? 1.0 / static_cast<double>(tokens) : 1.0;
  double nll = 0.0;
  for (const auto& p : batch) {
    const auto out_ids = output_ids(p.target);
    if (out_ids.empty()) continue;
    nll += backward(ids(p.source), out_ids, weight, grad);
  }
  return nll * weight;
}

// ---------------------------------------------------------------------------
// Checkpoint: magic, version, dims, vocab, then named row-major tensors.

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'T', 'M', 'P', 'L', 'N', 'E', 'R', '\0'};

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw ParseError(0, "checkpoint: truncated");
  return value;
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const auto len = get<std::uint32_t>(in);
  if (len > (1u << 20)) throw ParseError(0, "checkpoint: implausible string length");
  std::string s(len, '\0');
  if (!in.read(s.data(), len)) throw ParseError(0, "checkpoint: truncated");
  return s;
}

}  // namespace

void TinySeq2Seq::save(std::ostream& out) const {
  require_initialized();
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(config_.embed_dim));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(config_.hidden_dim));
  put<std::uint8_t>(out, config_.append_eos ? 1 : 0);
  put<std::uint64_t>(out, config_.seed);
  put<std::uint64_t>(out, steps_trained_);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(vocab_.size()));
  for (const auto& tok : vocab_.tokens()) put_string(out, tok);

  std::uint32_t count = 0;
  params_.for_each([&](const std::string&, const Matrix&) { ++count; });
  put<std::uint32_t>(out, count);
  params_.for_each([&](const std::string& name, const Matrix& m) {
    put_string(out, name);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) put<double>(out, m(i, j));
  });
  if (!out) throw IoError("checkpoint: write failed");
}

void TinySeq2Seq::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  save(out);
}

TinySeq2Seq TinySeq2Seq::load(std::istream& in) {
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ParseError(0, "checkpoint: bad magic");
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    throw ParseError(0, "checkpoint: unsupported format version " + std::to_string(version));

  ModelConfig config;
  config.embed_dim = static_cast<int>(get<std::uint32_t>(in));
  config.hidden_dim = static_cast<int>(get<std::uint32_t>(in));
  config.append_eos = get<std::uint8_t>(in) != 0;
  config.seed = get<std::uint64_t>(in);
  const auto steps = get<std::uint64_t>(in);
  const auto vocab_size = get<std::uint64_t>(in);
  std::vector<std::string> tokens;
  tokens.reserve(vocab_size);
  for (std::uint64_t i = 0; i < vocab_size; ++i) tokens.push_back(get_string(in));
  if (vocab_size < kSpecials.size() || !std::equal(kSpecials.begin(), kSpecials.end(), tokens.begin()))
    throw ParseError(0, "checkpoint: vocabulary lacks reserved tokens");

  TinySeq2Seq model;
  model.vocab_ = Vocab(tokens);
  if (model.vocab_.tokens() != tokens) throw ParseError(0, "checkpoint: vocabulary is not in canonical order");
  model.config_ = config;
  model.params_ = Seq2SeqParams(model.vocab_.size(), config.embed_dim, config.hidden_dim);
  model.steps_trained_ = steps;

  const auto count = get<std::uint32_t>(in);
  std::uint32_t seen = 0;
  model.params_.for_each([&](const std::string& name, Matrix& m) {
    if (seen++ >= count) throw ParseError(0, "checkpoint: missing tensor '" + name + "'");
    const auto stored = get_string(in);
    if (stored != name) throw ParseError(0, "checkpoint: expected tensor '" + name + "', found '" + stored + "'");
    const auto rows = get<std::uint64_t>(in);
    const auto cols = get<std::uint64_t>(in);
    if (rows != static_cast<std::uint64_t>(m.rows()) || cols != static_cast<std::uint64_t>(m.cols()))
      throw ParseError(0, "checkpoint: tensor '" + name + "' has the wrong shape");
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = get<double>(in);
  });
  if (seen != count) throw ParseError(0, "checkpoint: unexpected extra tensors");
  return model;
}

TinySeq2Seq TinySeq2Seq::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return load(in);
}

bool operator==(const TinySeq2Seq& a, const TinySeq2Seq& b) {
  if (!(a.vocab_ == b.vocab_) || a.config_.embed_dim != b.config_.embed_dim ||
      a.config_.hidden_dim != b.config_.hidden_dim || a.config_.append_eos != b.config_.append_eos ||
      a.steps_trained_ != b.steps_trained_)
    return false;
  bool equal = true;
  std::vector<const Matrix*> rhs;
  b.params_.for_each([&](const std::string&, const Matrix& m) { rhs.push_back(&m); });
  std::size_t k = 0;
  a.params_.for_each([&](const std::string&, const Matrix& m) {
    const Matrix& other = *rhs[k++];
    equal = equal && m.rows() == other.rows() && m.cols() == other.cols() &&
            std::memcmp(m.data(), other.data(), sizeof(double) * static_cast<std::size_t>(m.size())) == 0;
  });
  return equal;
}

}  // namespace templner
