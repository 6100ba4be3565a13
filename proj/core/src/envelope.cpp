#include <algorithm>
#include <cmath>
#include <sstream>

#include "ccpt/dynamics.hpp"
#include "ccpt/errors.hpp"

namespace ccpt {
namespace {

bool close(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

DriveEnvelope& DriveEnvelope::hold(double duration, double detuning, double amplitude) {
  return append(EnvelopeSegment{SegmentKind::hold, duration, detuning, detuning, amplitude, amplitude});
}

DriveEnvelope& DriveEnvelope::step_hold(double duration, double detuning, double amplitude) {
  return append(
      EnvelopeSegment{SegmentKind::hold, duration, detuning, detuning, amplitude, amplitude, true});
}

DriveEnvelope& DriveEnvelope::ramp(double duration, double detuning_start, double detuning_end,
                                   double amp_start, double amp_end) {
  return append(
      EnvelopeSegment{SegmentKind::ramp, duration, detuning_start, detuning_end, amp_start, amp_end});
}

DriveEnvelope& DriveEnvelope::append(const EnvelopeSegment& segment) {
  if (!(segment.duration > 0.0) || !std::isfinite(segment.duration)) {
    throw InvalidArgument("envelope segment duration must be positive and finite");
  }
  for (double v : {segment.detuning_start, segment.detuning_end, segment.amp_start, segment.amp_end}) {
    if (!std::isfinite(v)) throw InvalidArgument("envelope segment values must be finite");
  }
  if (segment.amp_start < 0.0 || segment.amp_end < 0.0) {
    throw InvalidArgument("envelope amplitudes must be non-negative");
  }
  if (segment.kind == SegmentKind::hold &&
      (segment.detuning_start != segment.detuning_end || segment.amp_start != segment.amp_end)) {
    throw InvalidArgument("hold segment must have equal start and end values");
  }
  if (!segments_.empty() && !segment.step_start) {
    const EnvelopeSegment& prev = segments_.back();
    if (!close(prev.detuning_end, segment.detuning_start) || !close(prev.amp_end, segment.amp_start)) {
      std::ostringstream msg;
      msg << "envelope discontinuity at segment " << segments_.size() << ": detuning "
          << prev.detuning_end << " -> " << segment.detuning_start << ", amplitude "
          << prev.amp_end << " -> " << segment.amp_start;
      throw InvalidArgument(msg.str());
    }
  }
  starts_.push_back(duration());
  segments_.push_back(segment);
  return *this;
}

void DriveEnvelope::validate() const {
  if (segments_.empty()) throw InvalidArgument("drive envelope has no segments");
}

DriveEnvelope::Sample DriveEnvelope::at(double t) const {
  std::size_t cursor = 0;
  return at(t, &cursor);
}

DriveEnvelope::Sample DriveEnvelope::at(double t, std::size_t* cursor) const {
  if (segments_.empty()) return {};
  std::size_t i = std::min(*cursor, segments_.size() - 1);
  if (t < starts_[i]) {
    i = static_cast<std::size_t>(std::upper_bound(starts_.begin(), starts_.end(), t) - starts_.begin());
    i = i == 0 ? 0 : i - 1;
  } else {
    while (i + 1 < segments_.size() && t >= starts_[i + 1]) ++i;
  }
  *cursor = i;
  const EnvelopeSegment& seg = segments_[i];
  if (seg.kind == SegmentKind::hold) return {seg.detuning_start, seg.amp_start};
  const double frac = std::clamp((t - starts_[i]) / seg.duration, 0.0, 1.0);
  return {seg.detuning_start + frac * (seg.detuning_end - seg.detuning_start),
          seg.amp_start + frac * (seg.amp_end - seg.amp_start)};
}

}  // namespace ccpt
