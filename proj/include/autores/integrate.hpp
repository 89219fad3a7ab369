#pragma once

// Adaptive Dormand–Prince 5(4) integrator with PI step control, continuous
// (dense) output and event location on the interpolant.

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace autores {

/// dy = F(t, y). Implementations write every component of dy.
using VectorField = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0; // 0 picks one automatically
  std::size_t max_steps = 50'000'000;
  double blowup_norm = 1e8;
  double min_step_fraction = 1e-13; // of |t_end − t_start|

  void validate() const;
};

enum class EventKind { ThresholdCrossing, BlowUp, Custom };
enum class Direction { Rising, Falling, Any };

/// ThresholdCrossing watches y[component] − threshold, BlowUp watches
/// ‖y‖∞ − threshold and always terminates, Custom evaluates `function`.
struct Event {
  EventKind kind = EventKind::ThresholdCrossing;
  Direction direction = Direction::Any;
  double threshold = 0.0;
  std::size_t component = 0;
  std::function<double(double t, std::span<const double> y)> function;
  bool terminal = false;
  std::string name;

  static Event crossing(std::size_t component, double threshold,
                        Direction dir = Direction::Any, bool terminal = false);
  static Event blow_up(double threshold);
  static Event custom(std::string name, std::function<double(double, std::span<const double>)> g,
                      Direction dir = Direction::Any, bool terminal = false);

  double evaluate(double t, std::span<const double> y) const;
};

/// index is the position in the caller's event list; integrator-detected
/// blow-ups (norm limit, step collapse, non-finite RHS) use npos.
struct EventHit {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  double time = 0.0;
  std::size_t index = npos;
  EventKind kind = EventKind::Custom;
  std::vector<double> state;
  double bracket_lo = 0.0; // sign change of the event function lies in [lo, hi]
  double bracket_hi = 0.0;
};

struct IntegrationStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
};

enum class TrajectoryStatus { Completed, TerminalEvent, BlowUp };

class Trajectory {
public:
  explicit Trajectory(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  double time(std::size_t i) const { return times_[i]; }
  std::span<const double> state(std::size_t i) const {
    return {states_.data() + i * dim_, dim_};
  }
  double value(std::size_t i, std::size_t component) const { return states_[i * dim_ + component]; }
  const std::vector<double>& times() const { return times_; }
  double t_front() const { return times_.front(); }
  double t_back() const { return times_.back(); }
  /// +1 for forward, −1 for backward integration.
  int direction() const { return direction_; }

  std::vector<EventHit> events;
  IntegrationStats stats;
  TrajectoryStatus status = TrajectoryStatus::Completed;

  /// Index i of the step [t_i, t_{i+1}] containing t; throws outside the span.
  std::size_t locate(double t) const;
  std::vector<double> dense(double t) const;
  std::vector<double> dense_derivative(double t) const;

private:
  friend Trajectory integrate(const VectorField&, std::span<const double>, double, double,
                              const IntegratorConfig&, const std::vector<Event>&);

  void push(double t, std::span<const double> y);
  void push_dense(std::span<const double> coeffs, double h);


  std::size_t dim_;
  int direction_ = 1;
  std::vector<double> times_;
  std::vector<double> states_;
  std::vector<double> dense_; // 5·dim interpolation coefficients per step
  std::vector<double> steps_; // step size each interpolant was built for

};

class IntegrationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class MaxStepsExceeded : public IntegrationError {
public:
  MaxStepsExceeded(std::size_t steps, Trajectory partial);
  const Trajectory& partial() const { return partial_; }

private:
  Trajectory partial_;
};

/// Integrate from t0 to t1 (t1 < t0 integrates backward). Samples are stored
/// at every accepted step. Terminal events end the trajectory at the event.
/// A non-finite RHS, a state norm above blowup_norm or a collapsing step size
/// end it with a BlowUp hit instead of throwing.
Trajectory integrate(const VectorField& rhs, std::span<const double> y0, double t0, double t1,
                     const IntegratorConfig& cfg = {}, const std::vector<Event>& events = {});

/// Interpolated state at t. Sample times return the stored sample exactly.
/// Throws DomainError outside [t_front, t_back], which for a blown-up run
/// excludes everything past the blow-up.
std::vector<double> dense_eval(const Trajectory& traj, double t);

/// Time derivative of the interpolant (one order lower than dense_eval).
std::vector<double> dense_derivative(const Trajectory& traj, double t);

} // namespace autores
