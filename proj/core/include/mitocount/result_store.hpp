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

#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mitocount {

enum class SlideStatus { kCounted, kNoCount, kFailed };

[[nodiscard]] const char* to_string(SlideStatus status) noexcept;
[[nodiscard]] SlideStatus slide_status_from_string(const std::string& text);

struct ResultRecord {
  std::string slide_id;
  SlideStatus status = SlideStatus::kCounted;
  /// Absent for no-count (and failed) slides.
  std::optional<int> mf_total;
  std::optional<int> hpf_count;
  /// Seconds spent per stage, keyed by stage name.
  std::map<std::string, double> timings;
  std::string reason;  // failure reason, empty otherwise

  friend bool operator==(const ResultRecord&, const ResultRecord&) = default;
};

/// Throws std::invalid_argument when the no-count / failed rules are broken.
void validate(const ResultRecord& record);

[[nodiscard]] std::string record_to_json_line(const ResultRecord& record);
/// Throws ParseError.
[[nodiscard]] ResultRecord record_from_json_line(const std::string& line);

struct LockRetryPolicy {
  int attempts = 200;
  std::chrono::milliseconds initial_backoff{1};
  std::chrono::milliseconds max_backoff{50};
};

/// Thrown when the advisory lock stays held past the retry policy.
class StoreBusyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Append-only line-delimited record file. Appends take an in-process mutex
/// and an exclusive flock, so several processes can share one file.
class ResultStore {
 public:
  explicit ResultStore(std::filesystem::path path, LockRetryPolicy policy = {});

  void append(const ResultRecord& record);
  /// Records in insertion order, optionally filtered.
  [[nodiscard]] std::vector<ResultRecord> scan(
      const std::function<bool(const ResultRecord&)>& filter = nullptr) const;

  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  LockRetryPolicy policy_;
  mutable std::mutex mutex_;
};

}  // namespace mitocount
