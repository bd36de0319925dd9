#include "autobench/sim.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <tuple>

namespace autobench::sim {

namespace {

constexpr Nanos kUsToNs = 1000;
constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

std::size_t runnable_index(const AmaltheaModel& m, const std::string& id)
{
    const Runnable* r = m.find_runnable(id);
    if (!r)
        throw SimError("undeclared runnable '" + id + "'");
    return m.index_of(*r);
}

// Activation instants (ns) of a task in [0, horizon), with the relative
// deadline when there is one.
std::vector<std::pair<Nanos, std::optional<Nanos>>> activations(const Stimulus& s, Nanos horizon)
{
    std::vector<std::pair<Nanos, std::optional<Nanos>>> out;
    auto every = [&](Nanos first, Nanos step, std::optional<Nanos> deadline) {
        if (step < 1)
            throw SimError("stimulus '" + s.id + "' has a non-positive period");
        for (Nanos t = first; t < horizon; t += step)
            out.emplace_back(t, deadline);
    };
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Periodic>)
                every(k.offset * kUsToNs, k.period * kUsToNs, k.period * kUsToNs);
            else if constexpr (std::is_same_v<K, Sporadic>)
                every(0, k.min_inter_arrival * kUsToNs, std::nullopt);
            else if constexpr (std::is_same_v<K, Single>) {
                if (k.time * kUsToNs < horizon)
                    out.emplace_back(k.time * kUsToNs, std::nullopt);
            } else if constexpr (std::is_same_v<K, Pattern>) {
                for (auto t : k.times)
                    if (t * kUsToNs < horizon)
                        out.emplace_back(t * kUsToNs, std::nullopt);
            } else if (k.injection_period) {
                every(0, *k.injection_period * kUsToNs, std::nullopt);
            }
        },
        s.kind);
    return out;
}

}  // namespace

std::vector<PlannedJob> generate_jobs(const AmaltheaModel& model, Nanos horizon)
{
    std::vector<PlannedJob> jobs;
    for (std::size_t t = 0; t < model.task_count(); ++t) {
        const Task& task = model.task(t);
        const Stimulus* s = model.find_stimulus(task.stimulus);
        if (!s)
            throw SimError("task '" + task.name + "' has an undeclared stimulus");
        const bool periodic = std::holds_alternative<Periodic>(s->kind);
        std::vector<std::size_t> runnables;
        for (const auto& id : task.runnables)
            runnables.push_back(runnable_index(model, id));
        for (const auto& [release, rel_deadline] : activations(*s, horizon))
            for (std::size_t p = 0; p < runnables.size(); ++p) {
                PlannedJob j;
                j.task = t;
                j.position = p;
                j.runnable = runnables[p];
                j.release = release;
                if (rel_deadline)
                    j.deadline = release + *rel_deadline;
                j.periodic = periodic;
                jobs.push_back(j);
            }
    }
    std::stable_sort(jobs.begin(), jobs.end(), [&](const PlannedJob& a, const PlannedJob& b) {
        const auto pa = model.task(a.task).priority;
        const auto pb = model.task(b.task).priority;
        return std::tie(a.release, pb, a.task, a.position) < std::tie(b.release, pa, b.task, b.position);
    });
    return jobs;
}

Simulator::Simulator(const AmaltheaModel& model, const NocPlatform& platform,
                     std::optional<Nanos> horizon_ns)
    : model_(model), platform_(platform)
{
    if (horizon_ns) {
        horizon_ = *horizon_ns;
    } else {
        try {
            horizon_ = hyperperiod(model) * kUsToNs;
        } catch (const std::domain_error& e) {
            throw SimError(std::string(e.what()) + "; an explicit horizon is required");
        }
    }

    const std::size_t n_tasks = model.task_count();
    for (std::size_t t = 0; t < n_tasks; ++t) {
        const Task& task = model.task(t);
        std::vector<std::size_t> rs;
        for (const auto& id : task.runnables)
            rs.push_back(runnable_index(model, id));
        task_runnables_.push_back(std::move(rs));
        task_priority_.push_back(task.priority);
    }
    std::vector<std::size_t> by_name(n_tasks);
    std::iota(by_name.begin(), by_name.end(), 0);
    std::stable_sort(by_name.begin(), by_name.end(), [&](std::size_t a, std::size_t b) {
        return model.task(a).name < model.task(b).name;
    });
    task_name_rank_.resize(n_tasks);
    for (std::size_t k = 0; k < n_tasks; ++k)
        task_name_rank_[by_name[k]] = k;

    auto label_indices = [&](const std::vector<std::string>& ids) {
        std::vector<std::size_t> out;
        for (const auto& id : ids) {
            const Label* l = model.find_label(id);
            if (!l)
                throw SimError("undeclared label '" + id + "'");
            out.push_back(model.index_of(*l));
        }
        return out;
    };
    for (const auto& r : model.runnables()) {
        runnable_reads_.push_back(label_indices(r.reads));
        runnable_writes_.push_back(label_indices(r.writes));
    }

    triggered_by_label_.resize(model.label_count());
    for (std::size_t t = 0; t < n_tasks; ++t) {
        const Stimulus* s = model.find_stimulus(model.task(t).stimulus);
        if (const auto* ip = s ? std::get_if<InterProcess>(&s->kind) : nullptr) {
            const Label* l = model.find_label(ip->trigger_label);
            if (!l)
                throw SimError("undeclared trigger label '" + ip->trigger_label + "'");
            triggered_by_label_[model.index_of(*l)].push_back(t);
        }
    }

    plan_ = generate_jobs(model, horizon_);

    // Does any runnable of task `w` write a label read by runnable `r`?
    auto feeds = [&](std::size_t w_runnable, std::size_t r_runnable) {
        for (auto l : runnable_writes_[w_runnable]) {
            const auto& reads = runnable_reads_[r_runnable];
            if (std::find(reads.begin(), reads.end(), l) != reads.end())
                return true;
        }
        return false;
    };

    // Task-level writer -> reader edges among the tasks released together,
    // with cycles cut in favour of higher-priority writers.
    std::map<std::vector<std::size_t>, std::vector<std::pair<std::size_t, std::size_t>>> cache;
    auto task_edges = [&](const std::vector<std::size_t>& tasks) {
        auto it = cache.find(tasks);
        if (it != cache.end())
            return it->second;
        std::vector<std::pair<std::size_t, std::size_t>> candidates;
        for (auto x : tasks)
            for (auto y : tasks) {
                if (x == y)
                    continue;
                bool any = false;
                for (auto w : task_runnables_[x])
                    for (auto r : task_runnables_[y])
                        any = any || feeds(w, r);
                if (any)
                    candidates.emplace_back(x, y);
            }
        std::stable_sort(candidates.begin(), candidates.end(), [&](const auto& a, const auto& b) {
            return std::tuple(task_priority_[b.first], task_priority_[b.second]) <
                   std::tuple(task_priority_[a.first], task_priority_[a.second]);
        });
        std::vector<std::pair<std::size_t, std::size_t>> accepted;
        auto reaches = [&](std::size_t from, std::size_t to) {
            std::vector<std::size_t> stack{from};
            std::set<std::size_t> seen{from};
            while (!stack.empty()) {
                const auto u = stack.back();
                stack.pop_back();
                if (u == to)
                    return true;
                for (const auto& [a, b] : accepted)
                    if (a == u && seen.insert(b).second)
                        stack.push_back(b);
            }
            return false;
        };
        for (const auto& e : candidates)
            if (!reaches(e.second, e.first))
                accepted.push_back(e);
        cache.emplace(tasks, accepted);
        return accepted;
    };

    for (std::size_t begin = 0; begin < plan_.size();) {
        std::size_t end = begin;
        while (end < plan_.size() && plan_[end].release == plan_[begin].release)
            ++end;
        // task -> plan index of its position-0 job in this instant
        std::map<std::size_t, std::size_t> first_job;
        for (std::size_t i = begin; i < end; ++i)
            if (plan_[i].position == 0)
                first_job.emplace(plan_[i].task, i);
        if (first_job.size() > 1) {
            std::vector<std::size_t> tasks;
            for (const auto& [t, i] : first_job)
                tasks.push_back(t);
            for (const auto& [x, y] : task_edges(tasks)) {
                const auto& xs = task_runnables_[x];
                const auto& ys = task_runnables_[y];
                for (std::size_t pw = 0; pw < xs.size(); ++pw)
                    for (std::size_t pr = 0; pr < ys.size(); ++pr)
                        if (feeds(xs[pw], ys[pr]))
                            same_instant_deps_.push_back({first_job[x] + pw, first_job[y] + pr});
            }
        }
        begin = end;
    }
}

void Simulator::check(const Allocation& a) const
{
    if (a.runnable_core.size() != model_.runnable_count() || a.label_core.size() != model_.label_count())
        throw SimError("allocation must map all " + std::to_string(model_.runnable_count()) +
                       " runnables and " + std::to_string(model_.label_count()) + " labels");
    auto check_core = [&](std::size_t core, const std::string& what) {
        if (core >= platform_.core_count())
            throw SimError(what + " is mapped to unknown core index " + std::to_string(core));
        if (!platform_.is_active(core))
            throw SimError(what + " is mapped to inactive core '" + platform_.core(core).name + "'");
    };
    for (std::size_t i = 0; i < a.runnable_core.size(); ++i)
        check_core(a.runnable_core[i], "runnable '" + model_.runnable(i).name + "'");
    for (std::size_t i = 0; i < a.label_core.size(); ++i)
        check_core(a.label_core[i], "label '" + model_.label(i).name + "'");
}

SimResult Simulator::run(const Allocation& alloc, const SimOptions& options) const
{
    check(alloc);
    const Nanos horizon = options.horizon_ns.value_or(horizon_);
    if (horizon != horizon_) {
        SimOptions o = options;
        o.horizon_ns.reset();
        return Simulator(model_, platform_, horizon).run(alloc, o);
    }

    // Per-runnable cost on its allocated core.
    std::vector<Nanos> cost(model_.runnable_count());
    for (std::size_t r = 0; r < cost.size(); ++r) {
        const std::size_t core = alloc.runnable_core[r];
        const Coord here = platform_.core(core).position;
        Nanos c = platform_.execution_time(model_.runnable(r), core, options.mode);
        for (auto l : runnable_reads_[r])
            c += platform_.message_latency(model_.label(l).bit_length,
                                           platform_.core(alloc.label_core[l]).position, here);
        for (auto l : runnable_writes_[r])
            c += platform_.message_latency(model_.label(l).bit_length, here,
                                           platform_.core(alloc.label_core[l]).position);
        cost[r] = c;
    }

    struct Job {
        std::size_t task, position, runnable, task_job;
        Nanos release;
        std::optional<Nanos> deadline;
        std::size_t core;
        Nanos remaining;
        std::uint32_t pending = 0;
        bool released = false;
        bool started = false;
        Nanos start = 0, finish = 0;
    };
    std::vector<Job> jobs;
    std::vector<std::vector<std::uint32_t>> succ;
    jobs.reserve(plan_.size() + 64);
    succ.reserve(plan_.size() + 64);

    std::size_t task_jobs = 0;
    auto add_job = [&](std::size_t task, std::size_t pos, Nanos release, std::optional<Nanos> deadline) {
        const std::size_t r = task_runnables_[task][pos];
        if (pos == 0)
            ++task_jobs;
        jobs.push_back(Job{task, pos, r, task_jobs - 1, release, deadline, alloc.runnable_core[r],
                           cost[r]});
        succ.emplace_back();
        const auto id = static_cast<std::uint32_t>(jobs.size() - 1);
        if (pos > 0) {
            succ[id - 1].push_back(id);
            ++jobs[id].pending;
        }
        return id;
    };

    for (const auto& p : plan_)
        add_job(p.task, p.position, p.release, p.deadline);
    for (const auto& d : same_instant_deps_) {
        succ[d.from].push_back(static_cast<std::uint32_t>(d.to));
        ++jobs[d.to].pending;
    }
    const std::size_t planned = jobs.size();

    auto better = [&](std::uint32_t a, std::uint32_t b) {
        const Job& x = jobs[a];
        const Job& y = jobs[b];
        if (task_priority_[x.task] != task_priority_[y.task])
            return task_priority_[x.task] > task_priority_[y.task];
        if (x.release != y.release)
            return x.release < y.release;
        if (x.task != y.task)
            return task_name_rank_[x.task] < task_name_rank_[y.task];
        if (x.position != y.position)
            return x.position < y.position;
        return a < b;
    };
    auto heap_cmp = [&](std::uint32_t a, std::uint32_t b) { return better(b, a); };

    const std::size_t n_cores = platform_.core_count();
    std::vector<std::vector<std::uint32_t>> ready(n_cores);
    std::vector<std::uint32_t> running(n_cores, kNone);
    std::vector<Nanos> segment_begin(n_cores, 0);
    SimResult result;
    result.horizon_ns = horizon;

    auto make_ready = [&](std::uint32_t id) {
        auto& q = ready[jobs[id].core];
        q.push_back(id);
        std::push_heap(q.begin(), q.end(), heap_cmp);
    };
    auto close_segment = [&](std::size_t core, Nanos now) {
        if (options.record_segments && now > segment_begin[core])
            result.segments.push_back({core, running[core], segment_begin[core], now});
    };

    Nanos now = 0;
    std::size_t next_release = 0;  // planned jobs are in release order
    while (true) {
        Nanos next = std::numeric_limits<Nanos>::max();
        if (next_release < planned)
            next = jobs[next_release].release;
        for (std::size_t c = 0; c < n_cores; ++c)
            if (running[c] != kNone)
                next = std::min(next, now + jobs[running[c]].remaining);
        if (next == std::numeric_limits<Nanos>::max())
            break;

        const Nanos dt = next - now;
        for (std::size_t c = 0; c < n_cores; ++c)
            if (running[c] != kNone)
                jobs[running[c]].remaining -= dt;
        now = next;

        for (std::size_t c = 0; c < n_cores; ++c) {
            const std::uint32_t id = running[c];
            if (id == kNone || jobs[id].remaining > 0)
                continue;
            close_segment(c, now);
            running[c] = kNone;
            jobs[id].finish = now;
            for (auto s : succ[id])
                if (--jobs[s].pending == 0 && jobs[s].released)
                    make_ready(s);
            if (now >= horizon)
                continue;
            for (auto l : runnable_writes_[jobs[id].runnable])
                for (auto t : triggered_by_label_[l]) {
                    if (jobs.size() + task_runnables_[t].size() > options.max_jobs)
                        throw ActivationStorm("activation storm: more than " +
                                              std::to_string(options.max_jobs) + " jobs");
                    for (std::size_t p = 0; p < task_runnables_[t].size(); ++p) {
                        const auto nid = add_job(t, p, now, std::nullopt);
                        jobs[nid].released = true;
                        if (jobs[nid].pending == 0)
                            make_ready(nid);
                    }
                }
        }

        while (next_release < planned && jobs[next_release].release == now) {
            jobs[next_release].released = true;
            if (jobs[next_release].pending == 0)
                make_ready(static_cast<std::uint32_t>(next_release));
            ++next_release;
        }

        for (std::size_t c = 0; c < n_cores; ++c) {
            auto& q = ready[c];
            if (q.empty())
                continue;
            if (running[c] != kNone) {
                if (!options.preemptive || !better(q.front(), running[c]))
                    continue;
                close_segment(c, now);
                const auto preempted = running[c];
                running[c] = kNone;
                make_ready(preempted);
            }
            std::pop_heap(q.begin(), q.end(), heap_cmp);
            const auto id = q.back();
            q.pop_back();
            running[c] = id;
            segment_begin[c] = now;
            if (!jobs[id].started) {
                jobs[id].started = true;
                jobs[id].start = now;
            }
        }
    }

    result.jobs.reserve(jobs.size());
    for (const auto& j : jobs) {
        JobRecord rec;
        rec.runnable = j.runnable;
        rec.task = j.task;
        rec.task_job = j.task_job;
        rec.position = j.position;
        rec.release_ns = j.release;
        rec.start_ns = j.start;
        rec.finish_ns = j.finish;
        rec.absolute_deadline_ns = j.deadline;
        rec.core = j.core;
        rec.missed = j.deadline && j.finish > *j.deadline;
        result.makespan_ns = std::max(result.makespan_ns, j.finish);
        if (j.deadline) {
            ++result.total_deadlines;
            result.missed_deadlines += rec.missed ? 1 : 0;
        }
        result.jobs.push_back(rec);
    }
    return result;
}

SimResult simulate(const AmaltheaModel& model, const NocPlatform& platform,
                   const Allocation& allocation, const SimOptions& options)
{
    return Simulator(model, platform, options.horizon_ns).run(allocation, options);
}

DeadlineCount count_deadlines(const SimResult& result)
{
    DeadlineCount c;
    for (const auto& j : result.jobs)
        if (j.absolute_deadline_ns) {
            ++c.total;
            c.missed += j.absolute_deadline_ns && j.finish_ns > *j.absolute_deadline_ns ? 1 : 0;
        }
    return c;
}

}  // namespace autobench::sim
