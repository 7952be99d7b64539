#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hapticdrone/world.hpp"

namespace hapticdrone::eval {

struct FlightCriteria {
  double success_radius = 0.8;  ///< m
  double hover_duration = 5.0;  ///< s
  double timeout = 40.0;        ///< s

  void validate() const;
};

enum class OutcomeClass : std::uint8_t { Success = 0, Partial = 1, Fail = 2 };

std::string_view to_string(OutcomeClass c) noexcept;
OutcomeClass outcome_from_string(std::string_view name);

struct FlightOutcome {
  OutcomeClass outcome = OutcomeClass::Fail;
  std::optional<double> reach_time;  ///< s, relative to the trajectory start
  std::vector<double> hover_pose_errors;  ///< m, over the qualifying or longest span

  friend bool operator==(const FlightOutcome&, const FlightOutcome&) = default;
};

/// A contiguous run of in-radius samples lasts t_last - t_first. Samples after
/// the timeout are ignored. Throws InputError on an empty trajectory.
FlightOutcome classify_flight(std::span<const sim::TrajectorySample> traj, const Vec3& target,
                              const FlightCriteria& c);

struct FlightSummary {
  std::size_t total = 0;
  std::size_t successes = 0;
  std::size_t partials = 0;
  std::size_t fails = 0;
  double success_rate = 0.0;
  std::optional<double> reach_time_mean;
  std::optional<double> reach_time_min;
  std::optional<double> reach_time_max;
  std::size_t pose_error_flights = 0;
  std::optional<double> pose_error_mean;    ///< mean of per-flight mean errors
  std::optional<double> pose_error_stderr;  ///< sample std / sqrt(n); needs n >= 2
};

/// Throws InputError on an empty list.
FlightSummary flight_metrics(std::span<const FlightOutcome> outcomes);

/// One-line human summary in the "rate, reach time, pose error" format.
std::string format_summary(const FlightSummary& s);

}  // namespace hapticdrone::eval
