#include "autobench/model.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

namespace autobench {

namespace {

template <typename T>
std::size_t insert(std::vector<T>& items, std::unordered_map<std::string, std::size_t>& ids,
                   T item, const char* kind)
{
    if (ids.count(item.id))
        throw DuplicateId(std::string("duplicate ") + kind + " id '" + item.id + "'");
    const std::size_t index = items.size();
    ids.emplace(item.id, index);
    items.push_back(std::move(item));
    return index;
}

template <typename T>
const T& at(const std::vector<T>& items, std::size_t index, const char* kind)
{
    if (index >= items.size())
        throw std::out_of_range(std::string(kind) + " index " + std::to_string(index) +
                                " out of range (count " + std::to_string(items.size()) + ")");
    return items[index];
}

template <typename T>
const T* find(const std::vector<T>& items, const std::unordered_map<std::string, std::size_t>& map,
              const std::string& key)
{
    auto it = map.find(key);
    return it == map.end() ? nullptr : &items[it->second];
}

template <typename T>
std::size_t index_in(const std::vector<T>& items,
                     const std::unordered_map<std::string, std::size_t>& ids, const T& item,
                     const char* kind)
{
    auto it = ids.find(item.id);
    if (it == ids.end() || !(items[it->second] == item))
        throw std::invalid_argument(std::string(kind) + " '" + item.id +
                                    "' does not belong to this model");
    return it->second;
}

bool contains(const std::vector<std::string>& v, const std::string& s)
{
    return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

std::size_t AmaltheaModel::add_label(Label l)
{
    const std::string name = l.name;
    const auto index = insert(labels_, label_ids_, std::move(l), "label");
    label_names_.emplace(name, index);
    return index;
}

std::size_t AmaltheaModel::add_runnable(Runnable r)
{
    const std::string name = r.name;
    const auto index = insert(runnables_, runnable_ids_, std::move(r), "runnable");
    runnable_names_.emplace(name, index);
    return index;
}

std::size_t AmaltheaModel::add_stimulus(Stimulus s)
{
    return insert(stimuli_, stimulus_ids_, std::move(s), "stimulus");
}

std::size_t AmaltheaModel::add_task(Task t)
{
    const std::string name = t.name;
    const auto index = insert(tasks_, task_ids_, std::move(t), "task");
    task_names_.emplace(name, index);
    return index;
}

std::size_t AmaltheaModel::add_core_type(CoreType ct)
{
    return insert(core_types_, core_type_ids_, std::move(ct), "core type");
}

std::size_t AmaltheaModel::add_quartz(Quartz q)
{
    return insert(quartzes_, quartz_ids_, std::move(q), "quartz");
}

std::size_t AmaltheaModel::add_core(Core c)
{
    return insert(cores_, core_ids_, std::move(c), "core");
}

const Label& AmaltheaModel::label(std::size_t i) const { return at(labels_, i, "label"); }
const Runnable& AmaltheaModel::runnable(std::size_t i) const { return at(runnables_, i, "runnable"); }
const Stimulus& AmaltheaModel::stimulus(std::size_t i) const { return at(stimuli_, i, "stimulus"); }
const Task& AmaltheaModel::task(std::size_t i) const { return at(tasks_, i, "task"); }
const CoreType& AmaltheaModel::core_type(std::size_t i) const { return at(core_types_, i, "core type"); }
const Quartz& AmaltheaModel::quartz(std::size_t i) const { return at(quartzes_, i, "quartz"); }
const Core& AmaltheaModel::core(std::size_t i) const { return at(cores_, i, "core"); }

const Label* AmaltheaModel::find_label(const std::string& id) const { return find(labels_, label_ids_, id); }
const Label* AmaltheaModel::find_label_by_name(const std::string& name) const { return find(labels_, label_names_, name); }
const Runnable* AmaltheaModel::find_runnable(const std::string& id) const { return find(runnables_, runnable_ids_, id); }
const Runnable* AmaltheaModel::find_runnable_by_name(const std::string& name) const { return find(runnables_, runnable_names_, name); }
const Stimulus* AmaltheaModel::find_stimulus(const std::string& id) const { return find(stimuli_, stimulus_ids_, id); }
const Task* AmaltheaModel::find_task(const std::string& id) const { return find(tasks_, task_ids_, id); }
const Task* AmaltheaModel::find_task_by_name(const std::string& name) const { return find(tasks_, task_names_, name); }
const CoreType* AmaltheaModel::find_core_type(const std::string& id) const { return find(core_types_, core_type_ids_, id); }
const Quartz* AmaltheaModel::find_quartz(const std::string& id) const { return find(quartzes_, quartz_ids_, id); }
const Core* AmaltheaModel::find_core(const std::string& id) const { return find(cores_, core_ids_, id); }

std::size_t AmaltheaModel::index_of(const Label& l) const { return index_in(labels_, label_ids_, l, "label"); }
std::size_t AmaltheaModel::index_of(const Runnable& r) const { return index_in(runnables_, runnable_ids_, r, "runnable"); }
std::size_t AmaltheaModel::index_of(const Stimulus& s) const { return index_in(stimuli_, stimulus_ids_, s, "stimulus"); }
std::size_t AmaltheaModel::index_of(const Task& t) const { return index_in(tasks_, task_ids_, t, "task"); }
std::size_t AmaltheaModel::index_of(const CoreType& ct) const { return index_in(core_types_, core_type_ids_, ct, "core type"); }
std::size_t AmaltheaModel::index_of(const Quartz& q) const { return index_in(quartzes_, quartz_ids_, q, "quartz"); }
std::size_t AmaltheaModel::index_of(const Core& c) const { return index_in(cores_, core_ids_, c, "core"); }

std::vector<const Runnable*> AmaltheaModel::label_writers(const Label& l) const
{
    index_of(l);
    std::vector<const Runnable*> out;
    for (const auto& r : runnables_)
        if (contains(r.writes, l.id))
            out.push_back(&r);
    return out;
}

std::vector<const Runnable*> AmaltheaModel::label_readers(const Label& l) const
{
    index_of(l);
    std::vector<const Runnable*> out;
    for (const auto& r : runnables_)
        if (contains(r.reads, l.id))
            out.push_back(&r);
    return out;
}

const Task* AmaltheaModel::owning_task(const Runnable& r) const
{
    for (const auto& t : tasks_)
        if (contains(t.runnables, r.id))
            return &t;
    return nullptr;
}

bool AmaltheaModel::operator==(const AmaltheaModel& o) const
{
    return labels_ == o.labels_ && runnables_ == o.runnables_ && stimuli_ == o.stimuli_ &&
           tasks_ == o.tasks_ && core_types_ == o.core_types_ && quartzes_ == o.quartzes_ &&
           cores_ == o.cores_;
}

Micros hyperperiod(const AmaltheaModel& model)
{
    Micros h = 0;
    for (const auto& t : model.tasks()) {
        const Stimulus* s = model.find_stimulus(t.stimulus);
        if (!s)
            continue;
        if (const auto* p = std::get_if<Periodic>(&s->kind)) {
            if (p->period < 1)
                throw std::domain_error("task '" + t.name + "' has a non-positive period");
            if (h == 0) {
                h = p->period;
                continue;
            }
            // the simulator works in ns, so keep 1000 * h representable
            const Micros step = p->period / std::gcd(h, p->period);
            if (h > std::numeric_limits<Nanos>::max() / 1000 / step)
                throw std::overflow_error("hyperperiod exceeds the representable range");
            h *= step;
        }
    }
    if (h == 0)
        throw std::domain_error("no hyperperiod defined");
    return h;
}

namespace {

struct Report {
    std::vector<Violation> out;
    void add(std::string entity, std::string rule, std::string message)
    {
        out.push_back({std::move(entity), std::move(rule), std::move(message)});
    }
};

void check_label_refs(const AmaltheaModel& m, const Runnable& r, const std::vector<std::string>& refs,
                      const char* access, Report& rep)
{
    std::set<std::string> seen;
    for (const auto& id : refs) {
        if (!m.find_label(id))
            rep.add("runnable " + r.id, "dangling label ref",
                    std::string(access) + " of undeclared label '" + id + "'");
        if (!seen.insert(id).second)
            rep.add("runnable " + r.id, "duplicate label access",
                    std::string(access) + " of label '" + id + "' listed twice");
    }
}

template <typename T>
void check_unique_names(const std::vector<T>& items, const char* kind, Report& rep)
{
    std::set<std::string> names;
    for (const auto& item : items)
        if (!names.insert(item.name).second)
            rep.add(std::string(kind) + " " + item.id, "duplicate name",
                    "name '" + item.name + "' is used twice");
}

}  // namespace

std::vector<Violation> validate(const AmaltheaModel& m)
{
    Report rep;

    for (const auto& l : m.labels())
        if (l.bit_length < 1)
            rep.add("label " + l.id, "bit length", "bit length must be at least 1");
    check_unique_names(m.labels(), "label", rep);

    for (const auto& r : m.runnables()) {
        check_label_refs(m, r, r.reads, "read", rep);
        check_label_refs(m, r, r.writes, "write", rep);
        if (r.bcet_instructions < 1)
            rep.add("runnable " + r.id, "execution bounds", "BCET must be positive");
        if (r.bcet_instructions > r.wcet_instructions)
            rep.add("runnable " + r.id, "execution bounds", "BCET exceeds WCET");
    }
    check_unique_names(m.runnables(), "runnable", rep);

    for (const auto& s : m.stimuli()) {
        const std::string entity = "stimulus " + s.id;
        std::visit(
            [&](const auto& k) {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, Periodic>) {
                    if (k.period < 1)
                        rep.add(entity, "period", "period must be at least 1 us");
                    if (k.offset < 0)
                        rep.add(entity, "offset", "offset must be non-negative");
                } else if constexpr (std::is_same_v<K, Sporadic>) {
                    if (k.min_inter_arrival < 1)
                        rep.add(entity, "period", "minimum inter-arrival must be at least 1 us");
                } else if constexpr (std::is_same_v<K, Single>) {
                    if (k.time < 0)
                        rep.add(entity, "offset", "activation time must be non-negative");
                } else if constexpr (std::is_same_v<K, Pattern>) {
                    for (std::size_t i = 0; i < k.times.size(); ++i) {
                        if (k.times[i] < 0)
                            rep.add(entity, "offset", "activation time must be non-negative");
                        if (i > 0 && k.times[i] <= k.times[i - 1])
                            rep.add(entity, "pattern order",
                                    "activation times must be strictly increasing");
                    }
                } else {
                    if (!m.find_label(k.trigger_label))
                        rep.add(entity, "dangling label ref",
                                "trigger label '" + k.trigger_label + "' is undeclared");
                    if (k.injection_period && *k.injection_period < 1)
                        rep.add(entity, "period", "injection period must be at least 1 us");
                }
            },
            s.kind);
    }

    std::set<std::uint32_t> priorities;
    for (const auto& t : m.tasks()) {
        const std::string entity = "task " + t.id;
        if (!priorities.insert(t.priority).second)
            rep.add(entity, "duplicate priority",
                    "priority " + std::to_string(t.priority) + " is used by another task");
        if (!m.find_stimulus(t.stimulus))
            rep.add(entity, "dangling stimulus ref", "stimulus '" + t.stimulus + "' is undeclared");
        if (t.runnables.empty())
            rep.add(entity, "empty task", "task calls no runnables");
        for (const auto& rid : t.runnables)
            if (!m.find_runnable(rid))
                rep.add(entity, "dangling runnable ref", "runnable '" + rid + "' is undeclared");
    }
    check_unique_names(m.tasks(), "task", rep);

    for (const auto& ct : m.core_types())
        if (ct.ticks_per_instruction < 1)
            rep.add("core type " + ct.id, "ticks per instruction", "must be at least 1");
    for (const auto& q : m.quartzes())
        if (q.frequency_hz < 1)
            rep.add("quartz " + q.id, "frequency", "must be at least 1 Hz");

    std::set<std::pair<int, int>> positions;
    for (const auto& c : m.cores()) {
        const std::string entity = "core " + c.id;
        if (!m.find_core_type(c.core_type))
            rep.add(entity, "dangling core type ref", "core type '" + c.core_type + "' is undeclared");
        if (!m.find_quartz(c.quartz))
            rep.add(entity, "dangling quartz ref", "quartz '" + c.quartz + "' is undeclared");
        if (!positions.insert({c.position.x, c.position.y}).second)
            rep.add(entity, "duplicate position",
                    "position (" + std::to_string(c.position.x) + "," +
                        std::to_string(c.position.y) + ") is occupied by another core");
    }
    check_unique_names(m.cores(), "core", rep);

    return rep.out;
}

Nanos execution_time(const Runnable& r, const CoreType& type, const Quartz& quartz, Bound bound)
{
    if (quartz.frequency_hz == 0)
        throw std::invalid_argument("quartz '" + quartz.id + "' has zero frequency");
    using u128 = unsigned __int128;
    const std::uint64_t instructions =
        bound == Bound::WCET ? r.wcet_instructions : r.bcet_instructions;
    const u128 num = u128(instructions) * type.ticks_per_instruction * 1'000'000'000u;
    const u128 ns = (num + quartz.frequency_hz / 2) / quartz.frequency_hz;
    return std::max<Nanos>(1, static_cast<Nanos>(ns));
}

Nanos execution_time(const AmaltheaModel& model, const Runnable& r, const Core& core, Bound bound)
{
    const CoreType* type = model.find_core_type(core.core_type);
    const Quartz* quartz = model.find_quartz(core.quartz);
    if (!type || !quartz)
        throw std::invalid_argument("core '" + core.id + "' has unresolved type or quartz");
    return execution_time(r, *type, *quartz, bound);
}

const char* stimulus_kind_name(const StimulusKind& kind)
{
    static constexpr const char* names[] = {"periodic", "sporadic", "single", "pattern",
                                            "interProcess"};
    return names[kind.index()];
}

}  // namespace autobench
