#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "certmesh/types.hpp"

namespace certmesh {

std::string format_trace_line(Seconds t, const char* kind, std::int64_t src, std::int64_t dst,
                              std::int64_t request_id);

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void line(const std::string& text) = 0;
};

class MemoryTrace final : public TraceSink {
 public:
  void line(const std::string& text) override { lines.push_back(text); }
  std::vector<std::string> lines;
};

class FileTrace final : public TraceSink {
 public:
  explicit FileTrace(const std::string& path);
  void line(const std::string& text) override;
  bool good() const { return out_.good(); }

 private:
  std::ofstream out_;
};

}  // namespace certmesh
