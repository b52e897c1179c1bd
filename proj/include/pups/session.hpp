#pragma once

#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pups/optimizer.hpp"
#include "pups/problems.hpp"

namespace pups {

enum class RunStatus { running, paused, stopped };

inline const char* to_string(RunStatus s) noexcept {
  switch (s) {
    case RunStatus::running: return "RUNNING";
    case RunStatus::paused: return "PAUSED";
    case RunStatus::stopped: return "STOPPED";
  }
  return "UNKNOWN";
}

/// Immutable view of the run as of one loop boundary.
struct RunSnapshot {
  std::uint64_t version = 0;
  std::shared_ptr<const std::vector<Solution>> archive = std::make_shared<std::vector<Solution>>();
  std::shared_ptr<const std::vector<Solution>> history = std::make_shared<std::vector<Solution>>();
  PreferenceRanges ranges;
  std::size_t eval_count = 0;
  std::size_t budget = 0;
  std::size_t evals_left = 0;
  double avg_eval_time = 0.0;
  double estimated_time_left = 0.0;
  double elapsed_total = 0.0;
  RunStatus status = RunStatus::paused;
  bool awaiting_preferences = false;
  std::string last_error;
};

enum class StartResult { started, already_running, exhausted, stopped };

/// One loop boundary at which pending client commands were consumed.
struct BoundaryEvent {
  std::size_t step_index = 0;  ///< index of the step that runs next
  std::size_t eval_count = 0;
  std::optional<PreferenceRanges> applied_ranges;
  std::optional<std::size_t> applied_budget;
};

/// Owns one optimizer run on a background thread and mediates every client command.
///
/// Clients only touch the control block (under `mutex_`, never held across an
/// evaluation) and read published snapshots. The worker consumes pending ranges, budget
/// and stop requests at the loop boundary before each step, and publishes a snapshot
/// at every boundary.
class Session {
public:
  Session(Problem problem, OptimizerConfig config, std::size_t budget = 0)
      : problem_(std::move(problem)), optimizer_(problem_, config), budget_(budget) {
    auto initial = std::make_shared<RunSnapshot>();
    initial->ranges = PreferenceRanges::unbounded(problem_.objectives());
    initial->budget = budget;
    initial->evals_left = budget;
    snapshot_ = std::move(initial);
    optimizer_.set_budget(budget);
    optimizer_.set_step_observer([this](const StepRecord& r) {
      std::lock_guard lock(mutex_);
      step_log_.push_back(r);
    });
    worker_ = std::thread([this] { run(); });
  }

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  ~Session() { shutdown(); }

  std::size_t objectives() const noexcept { return problem_.objectives(); }
  const ProblemSpec& problem_spec() const noexcept { return problem_.spec(); }
  const OptimizerConfig& config() const noexcept { return optimizer_.config(); }

  StartResult start() {
    std::lock_guard lock(mutex_);
    if (status_ == RunStatus::stopped) return StartResult::stopped;
    if (status_ == RunStatus::running) return StartResult::already_running;
    if (budget_ <= eval_count_) return StartResult::exhausted;
    status_ = RunStatus::running;
    stop_requested_ = false;
    run_started_ = clock::now();
    cv_.notify_all();
    return StartResult::started;
  }

  /// Requests a pause at the next boundary; the burst in progress completes first.
  void stop() {
    std::lock_guard lock(mutex_);
    if (status_ == RunStatus::running) stop_requested_ = true;
  }

  /// Sets the absolute evaluation budget. On a running session it must exceed the
  /// current evaluation count.
  void set_budget(std::size_t evals) {
    std::lock_guard lock(mutex_);
    if (status_ == RunStatus::stopped) throw ContractViolation("session is stopped");
    if (status_ == RunStatus::running && evals <= eval_count_) {
      throw ContractViolation("budget must exceed the current evaluation count on a running session");
    }
    budget_ = evals;
    pending_budget_ = evals;
  }

  /// Queues ranges for the next boundary. Returns false for a repeat of the ranges
  /// already submitted last. Invalid ranges throw and leave everything untouched.
  bool apply_ranges(PreferenceRanges ranges) {
    ranges.validate(problem_.objectives());
    std::lock_guard lock(mutex_);
    if (ranges == submitted_ranges_) return false;
    submitted_ranges_ = ranges;
    pending_ranges_ = std::move(ranges);
    preferences_given_ = true;
    return true;
  }

  std::shared_ptr<const RunSnapshot> snapshot() const {
    std::lock_guard lock(snapshot_mutex_);
    return snapshot_;
  }

  /// Blocks until a snapshot newer than `after_version` is published or the timeout expires.
  std::shared_ptr<const RunSnapshot> wait_for_snapshot(std::uint64_t after_version,
                                                       std::chrono::milliseconds timeout) const {
    std::unique_lock lock(snapshot_mutex_);
    snapshot_cv_.wait_for(lock, timeout, [&] { return snapshot_->version > after_version; });
    return snapshot_;
  }

  /// Blocks until the worker is paused (or stopped) or the timeout expires.
  bool wait_until_paused(std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mutex_);
    return cv_.wait_for(lock, timeout, [&] { return status_ != RunStatus::running && !worker_busy_; });
  }

  RunStatus status() const {
    std::lock_guard lock(mutex_);
    return status_;
  }

  std::vector<BoundaryEvent> boundary_log() const {
    std::lock_guard lock(mutex_);
    return boundary_log_;
  }

  std::vector<StepRecord> step_log() const {
    std::lock_guard lock(mutex_);
    return step_log_;
  }

  /// Ends the run for good: the worker finishes its current burst and exits.
  void shutdown() {
    {
      std::lock_guard lock(mutex_);
      if (shutting_down_) return;
      shutting_down_ = true;
      cv_.notify_all();
    }
    if (worker_.joinable()) worker_.join();
    std::lock_guard lock(mutex_);
    status_ = RunStatus::stopped;
    publish_locked(false);
  }

private:
  using clock = std::chrono::steady_clock;

  void run() {
    std::unique_lock lock(mutex_);
    for (;;) {
      cv_.wait(lock, [&] { return status_ == RunStatus::running || shutting_down_; });
      if (shutting_down_) return;
      worker_busy_ = true;

      if (!optimizer_.initialized()) {
        const bool ok = unlocked(lock, [&] { optimizer_.initialize(problem_); });
        if (!ok) {
          pause_locked();
          continue;
        }
        eval_count_ = optimizer_.eval_count();
        // First iteration: the decision maker is asked for preferences, unless some
        // were supplied before the run started.
        if (!preferences_given_) {
          awaiting_preferences_ = true;
          consume_commands_locked();
          pause_locked();
          continue;
        }
      }

      // Loop boundary: consume commands, publish, decide whether to pause.
      consume_commands_locked();
      if (shutting_down_ || stop_requested_ || optimizer_.evals_left() == 0) {
        pause_locked();
        continue;
      }
      publish_locked(false);
      unlocked(lock, [&] { optimizer_.step(problem_); });
      eval_count_ = optimizer_.eval_count();
      if (last_error_.empty() && optimizer_.stalled()) {
        last_error_ = "population converged: every new candidate duplicates an evaluated point";
      }
      if (!last_error_.empty()) pause_locked();
    }
  }

  // Runs `fn` without holding the control lock; records failures as last_error_.
  template <typename Fn>
  bool unlocked(std::unique_lock<std::mutex>& lock, Fn&& fn) {
    std::string error;
    lock.unlock();
    try {
      fn();
    } catch (const std::exception& e) {
      error = e.what();
    }
    lock.lock();
    last_error_ = error;
    return error.empty();
  }

  void consume_commands_locked() {
    BoundaryEvent event;
    event.step_index = optimizer_.steps();
    event.eval_count = optimizer_.eval_count();
    if (pending_ranges_) {
      optimizer_.apply_ranges(*pending_ranges_);
      event.applied_ranges = std::move(pending_ranges_);
      pending_ranges_.reset();
      awaiting_preferences_ = false;
    }
    if (pending_budget_) {
      optimizer_.set_budget(*pending_budget_);
      event.applied_budget = pending_budget_;
      pending_budget_.reset();
    }
    if (event.applied_ranges || event.applied_budget) boundary_log_.push_back(std::move(event));
  }

  void pause_locked() {
    if (status_ == RunStatus::running) {
      elapsed_ += std::chrono::duration<double>(clock::now() - run_started_).count();
    }
    status_ = RunStatus::paused;
    stop_requested_ = false;
    worker_busy_ = false;
    publish_locked(true);
    cv_.notify_all();
  }

  void publish_locked(bool paused_now) {
    auto snap = std::make_shared<RunSnapshot>();
    snap->archive = std::make_shared<const std::vector<Solution>>(optimizer_.archive());
    snap->history = std::make_shared<const std::vector<Solution>>(optimizer_.all_points());
    snap->ranges = optimizer_.ranges();
    snap->eval_count = optimizer_.eval_count();
    snap->budget = budget_;
    snap->evals_left = budget_ > snap->eval_count ? budget_ - snap->eval_count : 0;
    snap->avg_eval_time = optimizer_.average_eval_seconds();
    snap->status = status_;
    const bool running = status_ == RunStatus::running && !paused_now;
    snap->elapsed_total =
        elapsed_ + (running ? std::chrono::duration<double>(clock::now() - run_started_).count() : 0.0);
    snap->estimated_time_left = running ? static_cast<double>(snap->evals_left) * snap->avg_eval_time : 0.0;
    snap->awaiting_preferences = awaiting_preferences_;
    snap->last_error = last_error_;
    {
      std::lock_guard slock(snapshot_mutex_);
      snap->version = snapshot_->version + 1;
      snapshot_ = std::move(snap);
    }
    snapshot_cv_.notify_all();
  }

  // Worker-owned.
  Problem problem_;
  Optimizer optimizer_;
  std::thread worker_;

  // Control block.
  mutable std::mutex mutex_;
  mutable std::condition_variable cv_;
  RunStatus status_ = RunStatus::paused;
  bool shutting_down_ = false;
  bool stop_requested_ = false;
  bool worker_busy_ = false;
  bool preferences_given_ = false;
  bool awaiting_preferences_ = false;
  std::size_t budget_;
  std::size_t eval_count_ = 0;
  std::optional<PreferenceRanges> pending_ranges_;
  std::optional<std::size_t> pending_budget_;
  std::optional<PreferenceRanges> submitted_ranges_;
  std::string last_error_;
  clock::time_point run_started_{};
  double elapsed_ = 0.0;
  std::vector<BoundaryEvent> boundary_log_;
  std::vector<StepRecord> step_log_;

  mutable std::mutex snapshot_mutex_;
  mutable std::condition_variable snapshot_cv_;
  std::shared_ptr<const RunSnapshot> snapshot_;
};

inline RunSnapshot without_history(const RunSnapshot& s) {
  RunSnapshot copy = s;
  copy.history = std::make_shared<const std::vector<Solution>>();
  return copy;
}

}  // namespace pups
