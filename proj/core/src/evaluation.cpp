#include "hapticdrone/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "hapticdrone/errors.hpp"

namespace hapticdrone::eval {

namespace {

// Sample times are multiples of dt_control and carry rounding noise.
constexpr double kTimeTolerance = 1e-9;

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
  double duration = 0.0;
};

}  // namespace

void FlightCriteria::validate() const {
  std::vector<std::string> problems;
  if (!(success_radius > 0.0)) problems.emplace_back("success_radius must be > 0");
  if (!(hover_duration > 0.0)) problems.emplace_back("hover_duration must be > 0");
  if (!(timeout > 0.0)) problems.emplace_back("timeout must be > 0");
  if (!(hover_duration < timeout)) problems.emplace_back("hover_duration must be < timeout");
  if (!problems.empty()) throw ValidationError(std::move(problems));
}

std::string_view to_string(OutcomeClass c) noexcept {
  switch (c) {
    case OutcomeClass::Success: return "success";
    case OutcomeClass::Partial: return "partial";
    case OutcomeClass::Fail: return "fail";
  }
  return "unknown";
}

OutcomeClass outcome_from_string(std::string_view name) {
  for (auto c : {OutcomeClass::Success, OutcomeClass::Partial, OutcomeClass::Fail}) {
    if (name == to_string(c)) return c;
  }
  throw ParseError("unknown outcome class '" + std::string(name) + "'");
}

FlightOutcome classify_flight(std::span<const sim::TrajectorySample> traj, const Vec3& target,
                              const FlightCriteria& c) {
  if (traj.empty()) throw InputError("cannot classify an empty trajectory");

  std::vector<double> errors;
  std::size_t n = 0;
  for (const auto& s : traj) {
    if (s.sim_time > c.timeout + kTimeTolerance) break;
    errors.push_back((s.position - target).norm());
    ++n;
  }

  std::vector<Span> spans;
  for (std::size_t i = 0; i < n;) {
    if (errors[i] > c.success_radius) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && errors[j] <= c.success_radius) ++j;
    spans.push_back({i, j, traj[j - 1].sim_time - traj[i].sim_time});
    i = j;
  }

  FlightOutcome out;
  if (spans.empty()) return out;

  out.reach_time = traj[spans.front().begin].sim_time;
  const auto qualifying = std::find_if(spans.begin(), spans.end(), [&](const Span& s) {
    return s.duration >= c.hover_duration - kTimeTolerance;
  });
  const Span* chosen = nullptr;
  if (qualifying != spans.end()) {
    out.outcome = OutcomeClass::Success;
    chosen = &*qualifying;
  } else {
    out.outcome = OutcomeClass::Partial;
    chosen = &*std::max_element(spans.begin(), spans.end(), [](const Span& a, const Span& b) {
      return a.end - a.begin < b.end - b.begin;
    });
  }
  out.hover_pose_errors.assign(errors.begin() + static_cast<std::ptrdiff_t>(chosen->begin),
                               errors.begin() + static_cast<std::ptrdiff_t>(chosen->end));
  return out;
}

FlightSummary flight_metrics(std::span<const FlightOutcome> outcomes) {
  if (outcomes.empty()) throw InputError("flight_metrics needs at least one outcome");
  FlightSummary s;
  s.total = outcomes.size();

  std::vector<double> reach;
  std::vector<double> per_flight_error;
  for (const auto& o : outcomes) {
    switch (o.outcome) {
      case OutcomeClass::Success: ++s.successes; break;
      case OutcomeClass::Partial: ++s.partials; break;
      case OutcomeClass::Fail: ++s.fails; break;
    }
    if (o.reach_time) reach.push_back(*o.reach_time);
    if (!o.hover_pose_errors.empty()) {
      const double sum =
          std::accumulate(o.hover_pose_errors.begin(), o.hover_pose_errors.end(), 0.0);
      per_flight_error.push_back(sum / static_cast<double>(o.hover_pose_errors.size()));
    }
  }
  s.success_rate = static_cast<double>(s.successes) / static_cast<double>(s.total);

  if (!reach.empty()) {
    s.reach_time_mean = std::accumulate(reach.begin(), reach.end(), 0.0) /
                        static_cast<double>(reach.size());
    s.reach_time_min = *std::min_element(reach.begin(), reach.end());
    s.reach_time_max = *std::max_element(reach.begin(), reach.end());
  }

  s.pose_error_flights = per_flight_error.size();
  if (!per_flight_error.empty()) {
    const double n = static_cast<double>(per_flight_error.size());
    const double mean = std::accumulate(per_flight_error.begin(), per_flight_error.end(), 0.0) / n;
    s.pose_error_mean = mean;
    if (per_flight_error.size() >= 2) {
      double ss = 0.0;
      for (double e : per_flight_error) ss += (e - mean) * (e - mean);
      s.pose_error_stderr = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
  }
  return s;
}

std::string format_summary(const FlightSummary& s) {
  std::string out = fmt::format("success rate {:.1f}% ({}/{}; {} partial, {} fail)",
                                100.0 * s.success_rate, s.successes, s.total, s.partials, s.fails);
  if (s.reach_time_mean) {
    out += fmt::format("; reach time mean {:.1f} s (min {:.1f} s, max {:.1f} s)",
                       *s.reach_time_mean, *s.reach_time_min, *s.reach_time_max);
  } else {
    out += "; reach time n/a";
  }
  if (s.pose_error_mean) {
    out += fmt::format("; hover pose error {:.2f} m", *s.pose_error_mean);
    out += s.pose_error_stderr ? fmt::format(" +/- {:.2f} m (s.e.)", *s.pose_error_stderr)
                               : std::string(" (s.e. n/a)");
  }
  return out;
}

}  // namespace hapticdrone::eval
