#pragma once
/**
 * @file params.hpp
 * @brief Named segments over a flat trainable vector.
 */

#include "bpfree/common.hpp"

#include <string>
#include <vector>

namespace bpfree {

struct Segment {
  std::string name;
  Index offset = 0;
  Index length = 0;
  int group = 0;
};

/// Disjoint segments covering [0, size()). Groups are dense ids 0..groups()-1.
class ParamView {
 public:
  ParamView() = default;

  /// Appends a segment directly after the last one, in a new group.
  void add(std::string name, Index length);
  /// Appends a segment in an explicit group.
  void add(std::string name, Index length, int group);

  const std::vector<Segment>& segments() const { return segments_; }
  Index size() const { return size_; }
  int groups() const { return groups_; }

  /// Same segments, all in group 0.
  ParamView merged() const;

  /// Index ranges [offset, offset + length) that belong to group g.
  std::vector<const Segment*> group_segments(int g) const;

  const Segment& find(const std::string& name) const;

  void validate() const;

 private:
  std::vector<Segment> segments_;
  Index size_ = 0;
  int groups_ = 0;
};

}  // namespace bpfree
