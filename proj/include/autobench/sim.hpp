#pragma once

// Discrete-event evaluation of one hyperperiod of a model on an allocated
// NoC platform.
//
// Semantics:
//  - every task activation becomes a task-job; its runnables execute in
//    list order, each runnable-job waiting for its predecessor to finish
//  - each core runs fixed-priority scheduling (preemptive by default) over
//    its ready runnable-jobs; ties by earlier release, task name, position
//  - for task-jobs released at the same instant, a runnable-job reading a
//    label waits for every same-instant runnable-job (of another task)
//    writing it; task-level cycles are cut by keeping edges from
//    higher-priority writers first
//  - a job's cost is its execution time on its core plus the NoC latency of
//    every remote label read and write; communication does not overlap
//  - finishing a runnable-job that writes a label releases, at that instant,
//    every task triggered by writes to that label (if still before the
//    horizon)
//  - periodic jobs carry deadline = release + period; all others none

#include "autobench/model.hpp"
#include "autobench/noc.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace autobench::sim {

// Total maps from model runnable / label index to platform core index.
struct Allocation {
    std::vector<std::size_t> runnable_core;
    std::vector<std::size_t> label_core;

    bool operator==(const Allocation&) const = default;
};

struct PlannedJob {
    std::size_t task = 0;
    std::size_t position = 0;  // index in the task's runnable list
    std::size_t runnable = 0;
    Nanos release = 0;
    std::optional<Nanos> deadline;
    bool periodic = false;
};

// Statically known activations in [0, horizon): periodic releases plus
// single, pattern, sporadic (at the maximum rate) and injected inter-process
// activations. Triggered activations happen only during simulation.
// Ordered by release, then task priority (descending), then position.
std::vector<PlannedJob> generate_jobs(const AmaltheaModel& model, Nanos horizon);

struct JobRecord {
    std::size_t runnable = 0;
    std::size_t task = 0;
    std::size_t task_job = 0;  // activation number, in creation order
    std::size_t position = 0;
    Nanos release_ns = 0;
    Nanos start_ns = 0;
    Nanos finish_ns = 0;
    std::optional<Nanos> absolute_deadline_ns;
    std::size_t core = 0;
    bool missed = false;

    bool operator==(const JobRecord&) const = default;
};

// A maximal interval during which one job ran uninterrupted on one core.
struct Segment {
    std::size_t core = 0;
    std::size_t job = 0;
    Nanos begin = 0;
    Nanos end = 0;

    bool operator==(const Segment&) const = default;
};

struct SimResult {
    std::vector<JobRecord> jobs;  // in creation order
    Nanos makespan_ns = 0;
    std::size_t missed_deadlines = 0;
    std::size_t total_deadlines = 0;
    Nanos horizon_ns = 0;
    std::vector<Segment> segments;  // only with SimOptions::record_segments

    bool operator==(const SimResult&) const = default;
};

struct SimOptions {
    Bound mode = Bound::WCET;
    bool preemptive = true;
    bool record_segments = false;
    std::size_t max_jobs = 1'000'000;
    // Defaults to the model hyperperiod.
    std::optional<Nanos> horizon_ns;
};

class SimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ActivationStorm : public SimError {
public:
    using SimError::SimError;
};

// Precomputes everything that does not depend on the allocation, so that
// many allocations can be evaluated cheaply. Holds references to `model` and
// `platform`; run() is const and safe to call concurrently.
class Simulator {
public:
    Simulator(const AmaltheaModel& model, const NocPlatform& platform,
              std::optional<Nanos> horizon_ns = std::nullopt);

    // Throws SimError for a malformed allocation or one using an inactive
    // core, ActivationStorm when triggers create more than max_jobs jobs.
    SimResult run(const Allocation& allocation, const SimOptions& options = {}) const;

    Nanos horizon_ns() const { return horizon_; }
    const AmaltheaModel& model() const { return model_; }
    const NocPlatform& platform() const { return platform_; }

    void check(const Allocation& allocation) const;

private:
    struct Dep {
        std::size_t from;  // index into plan_
        std::size_t to;
    };

    const AmaltheaModel& model_;
    const NocPlatform& platform_;
    Nanos horizon_;

    std::vector<PlannedJob> plan_;
    std::vector<Dep> same_instant_deps_;
    std::vector<std::vector<std::size_t>> task_runnables_;   // runnable indices
    std::vector<std::uint32_t> task_priority_;
    std::vector<std::size_t> task_name_rank_;
    std::vector<std::vector<std::size_t>> runnable_reads_;   // label indices
    std::vector<std::vector<std::size_t>> runnable_writes_;
    std::vector<std::vector<std::size_t>> triggered_by_label_;  // label -> tasks
};

// Horizon must be given when the model has no periodic task. Throws as
// Simulator::run.
SimResult simulate(const AmaltheaModel& model, const NocPlatform& platform,
                   const Allocation& allocation, const SimOptions& options = {});

struct DeadlineCount {
    std::size_t missed = 0;
    std::size_t total = 0;
};

DeadlineCount count_deadlines(const SimResult& result);

}  // namespace autobench::sim
