// Copyright 2026 The mitocount Authors. All Rights Reserved.
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

#include "mitocount/result_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "mitocount/error.hpp"

namespace mitocount {
namespace {

class Fd {
 public:
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  [[nodiscard]] int get() const noexcept { return fd_; }

 private:
  int fd_;
};

void lock_with_retry(int fd, int op, const LockRetryPolicy& policy, const std::string& what) {
  auto backoff = policy.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    if (::flock(fd, op | LOCK_NB) == 0) return;
    if (errno != EWOULDBLOCK && errno != EINTR) {
      throw IoError("flock " + what + ": " + std::strerror(errno));
    }
    if (attempt + 1 >= policy.attempts) throw StoreBusyError("result store busy: " + what);
    std::this_thread::sleep_for(backoff);
    backoff = std::min(policy.max_backoff, backoff * 2);
  }
}

}  // namespace

const char* to_string(SlideStatus status) noexcept {
  switch (status) {
    case SlideStatus::kCounted:
      return "counted";
    case SlideStatus::kNoCount:
      return "no-count";
    case SlideStatus::kFailed:
      return "failed";
  }
  return "failed";
}

SlideStatus slide_status_from_string(const std::string& text) {
  if (text == "counted") return SlideStatus::kCounted;
  if (text == "no-count") return SlideStatus::kNoCount;
  if (text == "failed") return SlideStatus::kFailed;
  throw ParseError("unknown slide status '" + text + "'");
}

void validate(const ResultRecord& record) {
  if (record.slide_id.empty()) throw std::invalid_argument("result record needs a slide_id");
  if (record.status != SlideStatus::kCounted && (record.mf_total || record.hpf_count)) {
    throw std::invalid_argument("only counted records carry mf_total / hpf_count");
  }
  if (record.status == SlideStatus::kCounted && !record.mf_total) {
    throw std::invalid_argument("counted records need mf_total");
  }
}

std::string record_to_json_line(const ResultRecord& record) {
  validate(record);
  nlohmann::ordered_json j;
  j["slide_id"] = record.slide_id;
  j["status"] = to_string(record.status);
  if (record.mf_total) j["mf_total"] = *record.mf_total;
  if (record.hpf_count) j["hpf_count"] = *record.hpf_count;
  j["timings"] = nlohmann::ordered_json::object();
  for (const auto& [stage, seconds] : record.timings) j["timings"][stage] = seconds;
  if (!record.reason.empty()) j["reason"] = record.reason;
  return j.dump() + "\n";
}

ResultRecord record_from_json_line(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    ResultRecord r;
    r.slide_id = j.at("slide_id").get<std::string>();
    r.status = slide_status_from_string(j.at("status").get<std::string>());
    if (j.contains("mf_total")) r.mf_total = j["mf_total"].get<int>();
    if (j.contains("hpf_count")) r.hpf_count = j["hpf_count"].get<int>();
    if (j.contains("timings")) r.timings = j["timings"].get<std::map<std::string, double>>();
    if (j.contains("reason")) r.reason = j["reason"].get<std::string>();
    validate(r);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("result record: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("result record: ") + e.what());
  }
}

ResultStore::ResultStore(std::filesystem::path path, LockRetryPolicy policy)
    : path_(std::move(path)), policy_(policy) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  Fd fd(::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644));
  if (fd.get() < 0) throw IoError("cannot open result store " + path_.string() + ": " + std::strerror(errno));
}

void ResultStore::append(const ResultRecord& record) {
  const std::string line = record_to_json_line(record);
  std::lock_guard lock(mutex_);
  Fd fd(::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644));
  if (fd.get() < 0) throw IoError("cannot open result store " + path_.string() + ": " + std::strerror(errno));
  lock_with_retry(fd.get(), LOCK_EX, policy_, path_.string());
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd.get(), line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::flock(fd.get(), LOCK_UN);
      throw IoError("write to result store " + path_.string() + ": " + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  ::fsync(fd.get());
  ::flock(fd.get(), LOCK_UN);
}

std::vector<ResultRecord> ResultStore::scan(const std::function<bool(const ResultRecord&)>& filter) const {
  std::lock_guard lock(mutex_);
  Fd fd(::open(path_.c_str(), O_RDONLY | O_CLOEXEC));
  if (fd.get() < 0) throw IoError("cannot open result store " + path_.string() + ": " + std::strerror(errno));
  lock_with_retry(fd.get(), LOCK_SH, policy_, path_.string());
  std::ifstream in(path_, std::ios::binary);
  std::vector<ResultRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ResultRecord r;
    try {
      r = record_from_json_line(line);
    } catch (const ParseError& e) {
      ::flock(fd.get(), LOCK_UN);
      throw ParseError(path_.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!filter || filter(r)) out.push_back(std::move(r));
  }
  ::flock(fd.get(), LOCK_UN);
  return out;
}

}  // namespace mitocount
