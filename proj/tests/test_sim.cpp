#include "doctest.h"

#include "sim_family.hpp"

#include "autobench/democar.hpp"
#include "autobench/io.hpp"
#include "autobench/sim.hpp"

#include <map>
#include <random>
#include <set>

using namespace autobench;

namespace {

// One core at 1 instruction = 1 ns.
NocPlatform unit_platform(int cores = 1)
{
    MeshCores mc;
    mc.width = cores;
    mc.height = 1;
    mc.core_types = {{"ct", 1}};
    mc.quartzes = {{"q", 1'000'000'000}};
    for (int x = 0; x < cores; ++x) {
        const std::string n = "c" + std::to_string(x);
        mc.cores.push_back({n, n, "ct", "q", {x, 0}});
        mc.active.push_back(true);
    }
    return NocPlatform(mc);
}

sim::Allocation all_on(const AmaltheaModel& m, std::size_t core)
{
    return io::single_core_allocation(m, core);
}

sim::Allocation random_allocation(const AmaltheaModel& m, const NocPlatform& p, std::mt19937_64& rng)
{
    const auto& act = p.active_cores();
    sim::Allocation a;
    for (std::size_t i = 0; i < m.runnable_count(); ++i)
        a.runnable_core.push_back(act[rng() % act.size()]);
    for (std::size_t i = 0; i < m.label_count(); ++i)
        a.label_core.push_back(act[rng() % act.size()]);
    return a;
}

bool ranks_before(const AmaltheaModel& m, const sim::SimResult& r, std::size_t a, std::size_t b)
{
    const auto& x = r.jobs[a];
    const auto& y = r.jobs[b];
    const auto& tx = m.task(x.task);
    const auto& ty = m.task(y.task);
    return std::make_tuple(-static_cast<std::int64_t>(tx.priority), x.release_ns, tx.name, x.position, a) <
           std::make_tuple(-static_cast<std::int64_t>(ty.priority), y.release_ns, ty.name, y.position, b);
}

}  // namespace

TEST_CASE("DemoCar job counts over one hyperperiod")
{
    const auto m = democar::build_democar();
    const auto plan = sim::generate_jobs(m, 100'000'000);
    std::map<std::size_t, std::set<Nanos>> task_releases;
    std::size_t periodic = 0;
    for (const auto& j : plan) {
        if (!j.periodic)
            continue;
        ++periodic;
        task_releases[j.task].insert(j.release);
    }
    std::size_t task_jobs = 0;
    for (const auto& [t, rel] : task_releases)
        task_jobs += rel.size();
    CHECK(task_jobs == 36);
    CHECK(periodic == 152);
    CHECK(task_releases.size() == 4);

    // plan order: release, then priority
    for (std::size_t i = 1; i < plan.size(); ++i) {
        CHECK(plan[i - 1].release <= plan[i].release);
        if (plan[i - 1].release == plan[i].release)
            CHECK(m.task(plan[i - 1].task).priority >= m.task(plan[i].task).priority);
    }
    // crank injections: 40 per 100 ms at 2.5 ms
    std::size_t crank = 0;
    for (const auto& j : plan)
        crank += m.task(j.task).name == "CylNumTriggeredTask" ? 1 : 0;
    CHECK(crank == 40);
}

TEST_CASE("empty model yields no jobs")
{
    AmaltheaModel m;
    CHECK(sim::generate_jobs(m, 1'000'000).empty());
    const auto r = sim::simulate(m, unit_platform(), {}, {.horizon_ns = 1'000'000});
    CHECK(r.jobs.empty());
    CHECK(r.makespan_ns == 0);
    CHECK(r.total_deadlines == 0);
}

TEST_CASE("single periodic task")
{
    AmaltheaModel m;
    m.add_runnable({"r", "r", 0, {}, {}, 1'000'000, 1'000'000});
    m.add_stimulus({"s", Periodic{10'000, 0}});
    m.add_task({"t", "t", 1, "s", {"r"}});
    // a second task fixes the hyperperiod at 100 ms
    m.add_runnable({"q", "q", 0, {}, {}, 1, 1});
    m.add_stimulus({"s100", Periodic{100'000, 0}});
    m.add_task({"u", "u", 0, "s100", {"q"}});

    auto p = unit_platform();
    const auto r = sim::simulate(m, p, all_on(m, 0));
    CHECK(r.horizon_ns == 100'000'000);
    CHECK(r.makespan_ns == 91'000'000);
    CHECK(r.missed_deadlines == 0);
    CHECK(r.total_deadlines == 11);
}

TEST_CASE("higher priority runs first")
{
    AmaltheaModel m;
    m.add_runnable({"hi", "hi", 0, {}, {}, 1'000'000, 1'000'000});
    m.add_runnable({"lo", "lo", 0, {}, {}, 1'000'000, 1'000'000});
    m.add_stimulus({"s", Periodic{10'000, 0}});
    m.add_task({"H", "H", 10, "s", {"hi"}});
    m.add_task({"L", "L", 5, "s", {"lo"}});
    const auto r = sim::simulate(m, unit_platform(), all_on(m, 0));
    for (const auto& j : r.jobs)
        if (j.release_ns == 0)
            CHECK(j.start_ns == (m.task(j.task).name == "L" ? 1'000'000 : 0));
    CHECK(r.makespan_ns == 2'000'000);
}

TEST_CASE("preemption and the non-preemptive mode")
{
    AmaltheaModel m;
    m.add_runnable({"long", "long", 0, {}, {}, 5'000, 5'000});
    m.add_runnable({"short", "short", 0, {}, {}, 1'000, 1'000});
    m.add_stimulus({"slow", Periodic{20, 0}});
    m.add_stimulus({"fast", Periodic{10, 2}});
    m.add_task({"L", "L", 1, "slow", {"long"}});
    m.add_task({"H", "H", 2, "fast", {"short"}});
    const auto p = unit_platform();

    const auto pre = sim::simulate(m, p, all_on(m, 0));
    const auto* hi = &pre.jobs[0];
    for (const auto& j : pre.jobs)
        if (m.task(j.task).name == "H" && j.release_ns == 2'000)
            hi = &j;
    CHECK(hi->start_ns == 2'000);
    CHECK(hi->finish_ns == 3'000);

    const auto np = sim::simulate(m, p, all_on(m, 0), {.preemptive = false});
    for (const auto& j : np.jobs)
        if (m.task(j.task).name == "H" && j.release_ns == 2'000)
            CHECK(j.start_ns == 5'000);
}

TEST_CASE("simulator agrees with the timeline oracle")
{
    std::size_t cases = 0, with_misses = 0, total_jobs = 0;
    std::uint64_t seed = 1;
    for (const auto& shape : family::all_shapes())
        for (int k = 0; k < 4; ++k, ++seed) {
            const auto in = family::make(shape, seed);
            const auto c = family::compare(in);
            CAPTURE(seed);
            CHECK(c.equal);
            ++cases;
            with_misses += c.missed > 0;
            total_jobs += c.jobs;
        }
    CHECK(cases == 117 * 4);
    // the family must exercise both schedulable and overloaded cases
    CHECK(with_misses > 20);
    CHECK(with_misses < cases - 20);
    MESSAGE(cases << " scenarios, " << total_jobs << " jobs, " << with_misses << " with misses");
}

TEST_CASE("segments: conservation, no overlap, priority order")
{
    const auto m = democar::build_democar();
    const NocPlatform p(democar::build_democar_platform(2, 2, 4));
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        const auto alloc = random_allocation(m, p, rng);
        sim::Simulator s(m, p);
        const auto r = s.run(alloc, {.record_segments = true});

        std::vector<Nanos> ran(r.jobs.size(), 0);
        for (const auto& seg : r.segments) {
            CHECK(seg.begin < seg.end);
            CHECK(seg.core == r.jobs[seg.job].core);
            CHECK(seg.begin >= r.jobs[seg.job].start_ns);
            CHECK(seg.end <= r.jobs[seg.job].finish_ns);
            ran[seg.job] += seg.end - seg.begin;
        }
        for (std::size_t j = 0; j < r.jobs.size(); ++j) {
            const auto& job = r.jobs[j];
            CHECK(job.start_ns >= job.release_ns);
            // execution plus communication cost, run exactly once
            const Runnable& run = m.runnable(job.runnable);
            Nanos cost = p.execution_time(run, job.core, Bound::WCET);
            for (const auto& id : run.reads) {
                const auto l = m.index_of(*m.find_label(id));
                cost += p.message_latency(m.label(l).bit_length, p.core(alloc.label_core[l]).position,
                                          p.core(job.core).position);
            }
            for (const auto& id : run.writes) {
                const auto l = m.index_of(*m.find_label(id));
                cost += p.message_latency(m.label(l).bit_length, p.core(job.core).position,
                                          p.core(alloc.label_core[l]).position);
            }
            CHECK(ran[j] == cost);
        }

        std::map<std::size_t, std::vector<sim::Segment>> per_core;
        for (const auto& seg : r.segments)
            per_core[seg.core].push_back(seg);
        for (auto& [c, segs] : per_core) {
            std::sort(segs.begin(), segs.end(), [](auto& a, auto& b) { return a.begin < b.begin; });
            for (std::size_t i = 1; i < segs.size(); ++i)
                CHECK(segs[i - 1].end <= segs[i].begin);
        }

        // while a job is started and unfinished, nothing ranked below it
        // runs on its core
        for (const auto& seg : r.segments)
            for (std::size_t j = 0; j < r.jobs.size(); ++j) {
                const auto& job = r.jobs[j];
                if (job.core != seg.core || j == seg.job)
                    continue;
                const bool overlaps = seg.begin < job.finish_ns && job.start_ns < seg.end;
                if (overlaps && ranks_before(m, r, j, seg.job))
                    FAIL("job " << seg.job << " ran while better job " << j << " was pending");
            }
    }
}

TEST_CASE("chains run in order")
{
    const auto m = democar::build_democar();
    const NocPlatform p(democar::build_democar_platform(2, 2, 4));
    std::mt19937_64 rng(3);
    const auto r = sim::simulate(m, p, random_allocation(m, p, rng));
    std::map<std::size_t, std::vector<const sim::JobRecord*>> by_task_job;
    for (const auto& j : r.jobs)
        by_task_job[j.task_job].push_back(&j);
    for (const auto& [tj, js] : by_task_job)
        for (std::size_t i = 1; i < js.size(); ++i) {
            CHECK(js[i]->position == js[i - 1]->position + 1);
            CHECK(js[i]->start_ns >= js[i - 1]->finish_ns);
        }
}

TEST_CASE("same-instant writer runs before reader")
{
    const auto m = democar::build_democar();
    const NocPlatform p(democar::build_democar_platform(2, 2, 4));
    // APedSensor (Task5ms) writes AcceleratorPedalPosition1/2 which
    // APedVoterSWCEntity (Task10ms) reads; put them on different cores.
    auto a = all_on(m, 0);
    a.runnable_core[m.index_of(*m.find_runnable_by_name("APedVoterSWCEntity"))] = 1;
    const auto r = sim::simulate(m, p, a);
    std::map<Nanos, Nanos> writer_finish;
    const auto w = m.index_of(*m.find_runnable_by_name("APedSensor"));
    const auto rd = m.index_of(*m.find_runnable_by_name("APedVoterSWCEntity"));
    for (const auto& j : r.jobs)
        if (j.runnable == w)
            writer_finish[j.release_ns] = j.finish_ns;
    std::size_t checked = 0;
    for (const auto& j : r.jobs)
        if (j.runnable == rd) {
            REQUIRE(writer_finish.count(j.release_ns));
            CHECK(j.start_ns >= writer_finish[j.release_ns]);
            ++checked;
        }
    CHECK(checked == 10);
}

TEST_CASE("writes trigger inter-process tasks at the writer's finish")
{
    const auto m = democar::build_democar();
    const NocPlatform p(democar::build_democar_platform(2, 2, 4));
    const auto r = sim::simulate(m, p, all_on(m, 0));
    const auto cyl = m.index_of(*m.find_runnable_by_name("CylNumObserverEntity"));
    std::set<Nanos> observer_finish;
    for (const auto& j : r.jobs)
        if (j.runnable == cyl)
            observer_finish.insert(j.finish_ns);
    std::size_t actuator = 0;
    for (const auto& j : r.jobs)
        if (m.task(j.task).name == "ActuatorTask" && j.position == 0) {
            CHECK(observer_finish.count(j.release_ns));
            CHECK_FALSE(j.absolute_deadline_ns);
            ++actuator;
        }
    CHECK(actuator == 40);
    CHECK(r.total_deadlines == 152);
}

TEST_CASE("BCET makespan does not exceed WCET makespan on DemoCar")
{
    const auto m = democar::build_democar();
    const NocPlatform p(democar::build_democar_platform(2, 2, 4));
    sim::Simulator s(m, p);
    std::mt19937_64 rng(17);
    for (int i = 0; i < 50; ++i) {
        const auto a = random_allocation(m, p, rng);
        CHECK(s.run(a, {.mode = Bound::BCET}).makespan_ns <= s.run(a).makespan_ns);
    }
}

TEST_CASE("results are deterministic")
{
    const auto m = democar::build_democar();
    const NocPlatform p(democar::build_democar_platform(2, 2, 4));
    std::mt19937_64 rng(5);
    const auto a = random_allocation(m, p, rng);
    const auto r1 = sim::simulate(m, p, a, {.record_segments = true});
    const auto r2 = sim::simulate(m, p, a, {.record_segments = true});
    CHECK(r1 == r2);
    sim::Simulator s(m, p);
    CHECK(s.run(a, {.record_segments = true}) == r1);
}

TEST_CASE("single core overload misses deadlines")
{
    const auto m = democar::build_democar();
    const NocPlatform p(democar::build_democar_platform(2, 2, 1));
    const auto r = sim::simulate(m, p, all_on(m, 0));
    CHECK(r.missed_deadlines > 0);
    const auto c = sim::count_deadlines(r);
    CHECK(c.missed == r.missed_deadlines);
    CHECK(c.total == 152);
}

TEST_CASE("allocation checks")
{
    const auto m = democar::build_democar();
    const NocPlatform p(democar::build_democar_platform(2, 2, 3));
    CHECK_THROWS_AS(sim::simulate(m, p, all_on(m, 3)), sim::SimError);  // inactive
    CHECK_THROWS_AS(sim::simulate(m, p, all_on(m, 7)), sim::SimError);  // unknown
    auto short_alloc = all_on(m, 0);
    short_alloc.label_core.pop_back();
    CHECK_THROWS_AS(sim::simulate(m, p, short_alloc), sim::SimError);

    AmaltheaModel none;
    none.add_runnable({"r", "r", 0, {}, {}, 1, 1});
    none.add_stimulus({"s", Single{0}});
    none.add_task({"t", "t", 1, "s", {"r"}});
    const auto up = unit_platform();
    CHECK_THROWS_AS(sim::Simulator(none, up), sim::SimError);
    CHECK(sim::simulate(none, up, all_on(none, 0), {.horizon_ns = 10}).jobs.size() == 1);
}

TEST_CASE("self-triggering task hits the activation ceiling")
{
    AmaltheaModel m;
    m.add_label({"x", "x", 8});
    m.add_runnable({"r", "r", 0, {}, {"x"}, 1, 1});
    m.add_stimulus({"s", InterProcess{"x", 1}});
    m.add_task({"t", "t", 1, "s", {"r"}});
    const auto p = unit_platform();
    CHECK_THROWS_AS(sim::simulate(m, p, all_on(m, 0), {.max_jobs = 500, .horizon_ns = 1'000'000}),
                    sim::ActivationStorm);
    // a short horizon stays under the ceiling
    const auto r = sim::simulate(m, p, all_on(m, 0), {.max_jobs = 500, .horizon_ns = 100});
    CHECK(r.jobs.size() == 100);
}

TEST_CASE("sporadic, single and pattern activations")
{
    AmaltheaModel m;
    m.add_runnable({"r", "r", 0, {}, {}, 1, 1});
    m.add_stimulus({"sp", Sporadic{3}});
    m.add_stimulus({"si", Single{4}});
    m.add_stimulus({"pa", Pattern{{1, 5, 12}}});
    m.add_task({"a", "a", 1, "sp", {"r"}});
    m.add_task({"b", "b", 2, "si", {"r"}});
    m.add_task({"c", "c", 3, "pa", {"r"}});
    const auto plan = sim::generate_jobs(m, 10'000);
    std::map<std::string, std::vector<Nanos>> rel;
    for (const auto& j : plan) {
        rel[m.task(j.task).name].push_back(j.release);
        CHECK_FALSE(j.deadline);
    }
    CHECK(rel["a"] == std::vector<Nanos>{0, 3'000, 6'000, 9'000});
    CHECK(rel["b"] == std::vector<Nanos>{4'000});
    CHECK(rel["c"] == std::vector<Nanos>{1'000, 5'000});
}
