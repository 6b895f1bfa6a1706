#pragma once

#include <atomic>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include "mtbreak/benchmark.h"
#include "mtbreak/corpus.h"

namespace mtbreak::testing {

inline Segment segment(std::string id, SegmentRole role, std::string src, std::string hyp,
                       std::optional<std::string> ref = std::nullopt) {
  return Segment{std::move(id), role, std::move(src), std::move(hyp), std::move(ref)};
}

inline TranslationInstance sp_instance(std::string id, bool task_ok, bool translated_ok,
                                       std::string lang = "zh") {
  TranslationInstance inst;
  inst.instance_id = std::move(id);
  inst.task = Task::kSP;
  inst.test_language = std::move(lang);
  inst.task_language = "en";
  inst.segments.push_back(segment("0", SegmentRole::kUtterance, "src", "hyp", "ref"));
  inst.task_language_correct = task_ok;
  inst.translated_correct = translated_ok;
  return inst;
}

inline TranslationInstance qa_instance(std::string id, bool task_ok, bool translated_ok) {
  TranslationInstance inst;
  inst.instance_id = std::move(id);
  inst.task = Task::kQA;
  inst.test_language = "ar";
  inst.task_language = "en";
  inst.segments.push_back(segment("q", SegmentRole::kQuestion, "sq", "hq", "rq"));
  inst.segments.push_back(segment("c", SegmentRole::kContext, "sc", "hc", "rc"));
  inst.task_language_correct = task_ok;
  inst.translated_correct = translated_ok;
  return inst;
}

inline BreakdownInstance labelled(std::string id, BreakdownLabel label) {
  return {sp_instance(std::move(id), true, label == BreakdownLabel::kNoBreakdown), label};
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("mtbreak_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace mtbreak::testing
