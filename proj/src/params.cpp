#include "bpfree/params.hpp"

#include <algorithm>

namespace bpfree {

void ParamView::add(std::string name, Index length) { add(std::move(name), length, groups_); }

void ParamView::add(std::string name, Index length, int group) {
  if (length < 0) throw Error(ErrorCode::InvalidLayout, "negative segment length");
  if (group < 0) throw Error(ErrorCode::InvalidLayout, "negative group id");
  segments_.push_back({std::move(name), size_, length, group});
  size_ += length;
  groups_ = std::max(groups_, group + 1);
}

ParamView ParamView::merged() const {
  ParamView v;
  for (const auto& s : segments_) v.add(s.name, s.length, 0);
  return v;
}

std::vector<const Segment*> ParamView::group_segments(int g) const {
  std::vector<const Segment*> out;
  for (const auto& s : segments_)
    if (s.group == g) out.push_back(&s);
  return out;
}

const Segment& ParamView::find(const std::string& name) const {
  for (const auto& s : segments_)
    if (s.name == name) return s;
  throw Error(ErrorCode::InvalidLayout, "no parameter segment named " + name);
}

void ParamView::validate() const {
  Index expected = 0;
  std::vector<bool> used(static_cast<std::size_t>(groups_), false);
  for (const auto& s : segments_) {
    if (s.offset != expected) throw Error(ErrorCode::InvalidLayout, "segments are not contiguous");
    expected += s.length;
    used[static_cast<std::size_t>(s.group)] = true;
  }
  if (expected != size_) throw Error(ErrorCode::InvalidLayout, "segments do not cover the store");
  if (std::find(used.begin(), used.end(), false) != used.end()) {
    throw Error(ErrorCode::InvalidLayout, "empty parameter group");
  }
}

}  // namespace bpfree
