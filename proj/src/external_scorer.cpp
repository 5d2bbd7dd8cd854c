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

#include "templner/external_scorer.hpp"

#include <cerrno>
#include <cmath>
#include <cstring>
#include <map>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"

#include "templner/error.hpp"

namespace templner {
namespace protocol {

using nlohmann::json;

std::string hello_line() { return R"({"hello":1,"protocol_version":1})"; }

std::string encode_request(const Request& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["src"] = r.src;
  j["tgt"] = r.tgt;
  j["protocol_version"] = r.protocol_version;
  return j.dump();
}

std::string encode_response(const Response& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  if (r.error)
    j["error"] = *r.error;
  else
    j["token_logprobs"] = r.token_logprobs;
  return j.dump();
}

namespace {

json parse_object(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(0, std::string("protocol: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(0, "protocol: record is not an object");
  return j;
}

}  // namespace

Request decode_request(const std::string& line) {
  json j = parse_object(line);
  try {
    Request r;
    r.id = j.at("id").get<std::int64_t>();
    r.src = j.at("src").get<Tokens>();
    r.tgt = j.at("tgt").get<Tokens>();
    r.protocol_version = j.value("protocol_version", kProtocolVersion);
    return r;
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("protocol: bad request: ") + e.what());
  }
}

Response decode_response(const std::string& line) {
  json j = parse_object(line);
  try {
    Response r;
    r.id = j.at("id").get<std::int64_t>();
    if (j.contains("error")) {
      r.error = j.at("error").is_string() ? j.at("error").get<std::string>() : j.at("error").dump();
    } else {
      r.token_logprobs = j.at("token_logprobs").get<std::vector<double>>();
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("protocol: bad response: ") + e.what());
  }
}

int decode_hello(const std::string& line) {
  json j = parse_object(line);
  if (!j.contains("hello") || !j.contains("protocol_version"))
    throw ParseError(0, "protocol: expected hello record, got '" + line + "'");
  try {
    return j.at("protocol_version").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("protocol: bad hello: ") + e.what());
  }
}

}  // namespace protocol

namespace {

// Line framing over a pair of file descriptors.
class FdChannel : public LineChannel {
 public:
  FdChannel(int read_fd, int write_fd, std::string name, pid_t child = -1)
      : read_fd_(read_fd), write_fd_(write_fd), name_(std::move(name)), child_(child) {}

  ~FdChannel() override {
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    if (child_ > 0) {
      int status = 0;
      // Closing stdin asks the child to exit; give it a moment, then insist.
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(child_, &status, WNOHANG) != 0) return;
        ::usleep(10000);
      }
      ::kill(child_, SIGTERM);
      ::waitpid(child_, &status, 0);
    }
  }

  void write_line(const std::string& line) override {
    std::string framed = line + '\n';
    const char* p = framed.data();
    std::size_t left = framed.size();
    while (left > 0) {
      ssize_t n = ::write(write_fd_, p, left);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ScorerError("write to " + name_ + " failed: " + std::strerror(errno));
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
  }

  std::optional<std::string> read_line(std::chrono::milliseconds timeout) override {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() < 0) left = std::chrono::milliseconds(0);
      pollfd pfd{read_fd_, POLLIN, 0};
      int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw ScorerError("poll on " + name_ + " failed: " + std::strerror(errno));
      }
      if (ready == 0) return std::nullopt;
      char chunk[4096];
      ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ScorerError("read from " + name_ + " failed: " + std::strerror(errno));
      }
      if (n == 0) throw ScorerError(name_ + " closed the connection");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  std::string name() const override { return name_; }

 private:
  int read_fd_;
  int write_fd_;
  std::string name_;
  pid_t child_;
  std::string buffer_;
};

std::unique_ptr<LineChannel> spawn(const std::string& command, const std::string& endpoint) {
  int to_child[2], from_child[2];
  if (::pipe(to_child) != 0) throw ScorerError("pipe failed for " + endpoint);
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw ScorerError("pipe failed for " + endpoint);
  }
  ::signal(SIGPIPE, SIG_IGN);
  pid_t pid = ::fork();
  if (pid < 0) throw ScorerError("fork failed for " + endpoint);
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_unique<FdChannel>(from_child[0], to_child[1], endpoint, pid);
}

std::unique_ptr<LineChannel> connect_tcp(const std::string& hostport, const std::string& endpoint) {
  const auto colon = hostport.rfind(':');
  if (colon == std::string::npos) throw ValueError("endpoint '" + endpoint + "' lacks a port");
  const std::string host = hostport.substr(0, colon);
  const std::string port = hostport.substr(colon + 1);

  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &found); rc != 0)
    throw ScorerError("cannot resolve " + endpoint + ": " + ::gai_strerror(rc));
  int fd = -1;
  for (addrinfo* ai = found; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(found);
  if (fd < 0) throw ScorerError("cannot connect to " + endpoint + ": " + std::strerror(errno));
  ::signal(SIGPIPE, SIG_IGN);
  return std::make_unique<FdChannel>(fd, fd, endpoint);
}

}  // namespace

std::unique_ptr<LineChannel> open_channel(const std::string& endpoint) {
  if (endpoint.starts_with("exec:")) return spawn(endpoint.substr(5), endpoint);
  if (endpoint.starts_with("tcp://")) return connect_tcp(endpoint.substr(6), endpoint);
  throw ValueError("unsupported scorer endpoint '" + endpoint + "' (expected exec:<cmd> or tcp://host:port)");
}

ExternalScorer::ExternalScorer(std::unique_ptr<LineChannel> channel, std::chrono::milliseconds timeout)
    : channel_(std::move(channel)), timeout_(timeout) {
  auto hello = channel_->read_line(timeout_);
  if (!hello) throw ScorerError("timed out waiting for hello from " + channel_->name());
  int version = 0;
  try {
    version = protocol::decode_hello(*hello);
  } catch (const ParseError& e) {
    throw ScorerError(channel_->name() + ": " + e.what());
  }
  if (version != kProtocolVersion)
    throw ScorerError(channel_->name() + " speaks protocol version " + std::to_string(version) + ", expected " +
                      std::to_string(kProtocolVersion));
}

std::unique_ptr<ExternalScorer> ExternalScorer::connect(const std::string& endpoint,
                                                        std::chrono::milliseconds timeout) {
  return std::make_unique<ExternalScorer>(open_channel(endpoint), timeout);
}

std::string ExternalScorer::describe() const { return "external(" + channel_->name() + ")"; }

std::vector<TargetScore> ExternalScorer::score_nonempty(std::span<const std::string> source,
                                                        std::span<const Tokens> targets) const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::map<std::int64_t, std::size_t> pending;  // id -> slot
  std::vector<TargetScore> out(targets.size());

  auto handle = [&](const std::string& line) {
    protocol::Response resp;
    try {
      resp = protocol::decode_response(line);
    } catch (const ParseError& e) {
      throw ScorerError("malformed response from " + channel_->name() + " (pending ids from " +
                        std::to_string(pending.begin()->first) + "): " + e.what());
    }
    auto it = pending.find(resp.id);
    if (it == pending.end())
      throw ScorerError("response with unexpected id " + std::to_string(resp.id) + " from " + channel_->name());
    if (resp.error)
      throw ScorerError(channel_->name() + " failed request id " + std::to_string(resp.id) + ": " + *resp.error);
    const Tokens& tgt = targets[it->second];
    if (resp.token_logprobs.size() != tgt.size())
      throw ScorerError("response id " + std::to_string(resp.id) + " has " +
                        std::to_string(resp.token_logprobs.size()) + " log-probabilities for " +
                        std::to_string(tgt.size()) + " target tokens");
    for (double v : resp.token_logprobs)
      if (!std::isfinite(v) || v > 0.0)
        throw ScorerError("response id " + std::to_string(resp.id) + " carries an invalid log-probability");
    out[it->second] = make_target_score(std::move(resp.token_logprobs));
    pending.erase(it);
  };

  for (std::size_t i = 0; i < targets.size(); ++i) {
    protocol::Request req{next_id_++, Tokens(source.begin(), source.end()), targets[i], kProtocolVersion};
    pending.emplace(req.id, i);
    channel_->write_line(protocol::encode_request(req));
    // Drain whatever is already answered so neither side's pipe fills up.
    while (auto ready = channel_->read_line(std::chrono::milliseconds(0))) handle(*ready);
  }
  while (!pending.empty()) {
    auto line = channel_->read_line(timeout_);
    if (!line)
      throw ScorerError("timed out waiting for " + channel_->name() + " (request id " +
                        std::to_string(pending.begin()->first) + " unanswered)");
    handle(*line);
  }
  return out;
}

}  // namespace templner
