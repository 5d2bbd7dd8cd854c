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

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "templner/scorer.hpp"

namespace templner {

inline constexpr int kProtocolVersion = 1;

/// Wire records, one JSON object per line:
///   server hello:  {"hello":1,"protocol_version":1}
///   request:       {"id":7,"src":[...],"tgt":[...],"protocol_version":1}
///   response:      {"id":7,"token_logprobs":[...]}  or  {"id":7,"error":"..."}
namespace protocol {

struct Request {
  std::int64_t id = 0;
  Tokens src;
  Tokens tgt;
  int protocol_version = kProtocolVersion;
};

struct Response {
  std::int64_t id = 0;
  std::vector<double> token_logprobs;
  std::optional<std::string> error;
};

std::string hello_line();
std::string encode_request(const Request& request);
std::string encode_response(const Response& response);
// Throw ParseError on malformed input.
Request decode_request(const std::string& line);
Response decode_response(const std::string& line);
// Returns the advertised protocol version.
int decode_hello(const std::string& line);

}  // namespace protocol

/// A bidirectional newline-framed text channel.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void write_line(const std::string& line) = 0;
  // nullopt on timeout; throws ScorerError on end-of-stream.
  virtual std::optional<std::string> read_line(std::chrono::milliseconds timeout) = 0;
  virtual std::string name() const = 0;
};

/// Opens "exec:<shell command>" (child process on stdin/stdout) or
/// "tcp://host:port".
std::unique_ptr<LineChannel> open_channel(const std::string& endpoint);

/// Client side of the scorer protocol. Batches are sent in full, responses
/// are matched back by id in any order. Calls are serialized on the channel.
class ExternalScorer : public GenerativeScorer {
 public:
  explicit ExternalScorer(std::unique_ptr<LineChannel> channel,
                          std::chrono::milliseconds timeout = std::chrono::seconds(60));
  static std::unique_ptr<ExternalScorer> connect(const std::string& endpoint,
                                                 std::chrono::milliseconds timeout = std::chrono::seconds(60));

  std::string describe() const override;

 protected:
  std::vector<TargetScore> score_nonempty(std::span<const std::string> source,
                                          std::span<const Tokens> targets) const override;

 private:
  std::unique_ptr<LineChannel> channel_;
  std::chrono::milliseconds timeout_;
  mutable std::mutex mutex_;
  mutable std::int64_t next_id_ = 0;
};

}  // namespace templner
