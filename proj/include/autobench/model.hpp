#pragma once

// In-memory AMALTHEA-style application model: software entities (labels,
// runnables, tasks, stimuli) and hardware entities (core types, quartzes,
// cores), with list/ID/name lookup.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace autobench {

using Micros = std::int64_t;
using Nanos = std::int64_t;

struct Label {
    std::string id;
    std::string name;
    std::uint32_t bit_length = 1;

    bool operator==(const Label&) const = default;
};

// Reads and writes hold label IDs, in declaration order.
struct Runnable {
    std::string id;
    std::string name;
    std::uint64_t size_bits = 0;
    std::vector<std::string> reads;
    std::vector<std::string> writes;
    std::uint64_t bcet_instructions = 1;
    std::uint64_t wcet_instructions = 1;

    bool operator==(const Runnable&) const = default;
};

struct Periodic {
    Micros period = 1;
    Micros offset = 0;
    bool operator==(const Periodic&) const = default;
};

struct Sporadic {
    Micros min_inter_arrival = 1;
    bool operator==(const Sporadic&) const = default;
};

struct Single {
    Micros time = 0;
    bool operator==(const Single&) const = default;
};

struct Pattern {
    std::vector<Micros> times;
    bool operator==(const Pattern&) const = default;
};

// Activation by a write to `trigger_label`. When nothing in the model writes
// the label, an optional injection period stands in for the environment
// (e.g. crank events) and releases the task periodically, without deadlines.
struct InterProcess {
    std::string trigger_label;
    std::optional<Micros> injection_period;
    bool operator==(const InterProcess&) const = default;
};

using StimulusKind = std::variant<Periodic, Sporadic, Single, Pattern, InterProcess>;

struct Stimulus {
    std::string id;
    StimulusKind kind;

    bool operator==(const Stimulus&) const = default;
};

// Larger priority value = more urgent.
struct Task {
    std::string id;
    std::string name;
    std::uint32_t priority = 0;
    std::string stimulus;
    std::vector<std::string> runnables;

    bool operator==(const Task&) const = default;
};

struct CoreType {
    std::string id;
    std::uint32_t ticks_per_instruction = 1;
    bool operator==(const CoreType&) const = default;
};

struct Quartz {
    std::string id;
    std::uint64_t frequency_hz = 1;
    bool operator==(const Quartz&) const = default;
};

struct Coord {
    int x = 0;
    int y = 0;
    bool operator==(const Coord&) const = default;
};

struct Core {
    std::string id;
    std::string name;
    std::string core_type;
    std::string quartz;
    Coord position;

    bool operator==(const Core&) const = default;
};

enum class Bound { BCET, WCET };

struct Violation {
    std::string entity;  // "<kind> <id>"
    std::string rule;    // short rule tag, e.g. "duplicate priority"
    std::string message;
};

// Raised when an ID is added twice; IDs key the lookup maps.
class DuplicateId : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class AmaltheaModel {
public:
    std::size_t add_label(Label l);
    std::size_t add_runnable(Runnable r);
    std::size_t add_stimulus(Stimulus s);
    std::size_t add_task(Task t);
    std::size_t add_core_type(CoreType ct);
    std::size_t add_quartz(Quartz q);
    std::size_t add_core(Core c);

    std::size_t label_count() const { return labels_.size(); }
    std::size_t runnable_count() const { return runnables_.size(); }
    std::size_t stimulus_count() const { return stimuli_.size(); }
    std::size_t task_count() const { return tasks_.size(); }
    std::size_t core_type_count() const { return core_types_.size(); }
    std::size_t quartz_count() const { return quartzes_.size(); }
    std::size_t core_count() const { return cores_.size(); }

    // Indexed access; an out-of-range index throws std::out_of_range.
    const Label& label(std::size_t index) const;
    const Runnable& runnable(std::size_t index) const;
    const Stimulus& stimulus(std::size_t index) const;
    const Task& task(std::size_t index) const;
    const CoreType& core_type(std::size_t index) const;
    const Quartz& quartz(std::size_t index) const;
    const Core& core(std::size_t index) const;

    // Lookups return nullptr when nothing matches.
    const Label* find_label(const std::string& id) const;
    const Label* find_label_by_name(const std::string& name) const;
    const Runnable* find_runnable(const std::string& id) const;
    const Runnable* find_runnable_by_name(const std::string& name) const;
    const Stimulus* find_stimulus(const std::string& id) const;
    const Task* find_task(const std::string& id) const;
    const Task* find_task_by_name(const std::string& name) const;
    const CoreType* find_core_type(const std::string& id) const;
    const Quartz* find_quartz(const std::string& id) const;
    const Core* find_core(const std::string& id) const;

    // Position of an entity in its list, located by ID. Throws
    // std::invalid_argument if the entity does not belong to this model.
    std::size_t index_of(const Label& l) const;
    std::size_t index_of(const Runnable& r) const;
    std::size_t index_of(const Stimulus& s) const;
    std::size_t index_of(const Task& t) const;
    std::size_t index_of(const CoreType& ct) const;
    std::size_t index_of(const Quartz& q) const;
    std::size_t index_of(const Core& c) const;

    const std::vector<Label>& labels() const { return labels_; }
    const std::vector<Runnable>& runnables() const { return runnables_; }
    const std::vector<Stimulus>& stimuli() const { return stimuli_; }
    const std::vector<Task>& tasks() const { return tasks_; }
    const std::vector<CoreType>& core_types() const { return core_types_; }
    const std::vector<Quartz>& quartzes() const { return quartzes_; }
    const std::vector<Core>& cores() const { return cores_; }

    // Runnables writing (resp. reading) the label, in model runnable order.
    std::vector<const Runnable*> label_writers(const Label& l) const;
    std::vector<const Runnable*> label_readers(const Label& l) const;

    // The task whose runnable list contains `r` first, or nullptr.
    const Task* owning_task(const Runnable& r) const;

    bool operator==(const AmaltheaModel& o) const;

private:
    std::vector<Label> labels_;
    std::vector<Runnable> runnables_;
    std::vector<Stimulus> stimuli_;
    std::vector<Task> tasks_;
    std::vector<CoreType> core_types_;
    std::vector<Quartz> quartzes_;
    std::vector<Core> cores_;

    std::unordered_map<std::string, std::size_t> label_ids_, label_names_;
    std::unordered_map<std::string, std::size_t> runnable_ids_, runnable_names_;
    std::unordered_map<std::string, std::size_t> stimulus_ids_;
    std::unordered_map<std::string, std::size_t> task_ids_, task_names_;
    std::unordered_map<std::string, std::size_t> core_type_ids_, quartz_ids_, core_ids_;
};

// LCM of the periods of all periodic stimuli attached to tasks, in µs.
// Throws std::domain_error("no hyperperiod defined") when there are none,
// std::overflow_error when the LCM in ns would not fit in 64 bits.
Micros hyperperiod(const AmaltheaModel& model);

std::vector<Violation> validate(const AmaltheaModel& model);

// instructions * ticks * 1e9 / frequency, rounded to nearest, at least 1 ns.
Nanos execution_time(const Runnable& r, const CoreType& type, const Quartz& quartz, Bound bound);

// Resolves the core's type and quartz through the model; throws
// std::invalid_argument if either reference dangles.
Nanos execution_time(const AmaltheaModel& model, const Runnable& r, const Core& core, Bound bound);

const char* stimulus_kind_name(const StimulusKind& kind);

}  // namespace autobench
