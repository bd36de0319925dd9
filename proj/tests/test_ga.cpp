#include "doctest.h"

#include "autobench/democar.hpp"
#include "autobench/ga.hpp"
#include "autobench/io.hpp"

#include <sstream>

using namespace autobench;

namespace {

// Two periodic tasks sharing labels on a 3x1 mesh: small enough to
// enumerate every allocation (3^7 chromosomes).
AmaltheaModel toy_model()
{
    AmaltheaModel m;
    m.add_label({"a", "a", 64});
    m.add_label({"b", "b", 32});
    m.add_label({"c", "c", 128});
    m.add_runnable({"r0", "r0", 0, {"c"}, {"a"}, 300, 400});
    m.add_runnable({"r1", "r1", 0, {"a"}, {"b"}, 200, 500});
    m.add_runnable({"r2", "r2", 0, {"b", "c"}, {}, 100, 300});
    m.add_runnable({"r3", "r3", 0, {"a"}, {"c"}, 400, 700});
    m.add_stimulus({"s1", Periodic{1, 0}});
    m.add_stimulus({"s2", Periodic{2, 0}});
    m.add_task({"fast", "fast", 2, "s1", {"r0", "r1"}});
    m.add_task({"slow", "slow", 1, "s2", {"r2", "r3"}});
    return m;
}

NocPlatform toy_platform()
{
    MeshCores mc;
    mc.width = 3;
    mc.height = 1;
    mc.core_types = {{"ct", 1}};
    mc.quartzes = {{"q", 1'000'000'000}};
    for (int x = 0; x < 3; ++x) {
        const std::string n = "c" + std::to_string(x);
        mc.cores.push_back({n, n, "ct", "q", {x, 0}});
        mc.active.push_back(true);
    }
    return NocPlatform(mc, {40, 16});
}

ga::Fitness exhaustive_optimum(const AmaltheaModel& m, const NocPlatform& p, std::size_t* count)
{
    const sim::Simulator s(m, p);
    const std::size_t n = ga::gene_count(m);
    ga::Chromosome c;
    c.genes.assign(n, 0);
    ga::Fitness best = ga::evaluate(c, s);
    *count = 0;
    while (true) {
        ++*count;
        best = std::min(best, ga::evaluate(c, s));
        std::size_t i = 0;
        while (i < n && ++c.genes[i] == 3)
            c.genes[i++] = 0;
        if (i == n)
            break;
    }
    return best;
}

ga::GaConfig small_config(std::uint64_t seed)
{
    ga::GaConfig c;
    c.generations = 15;
    c.population = 10;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("gene layout and decode/encode")
{
    const auto m = democar::build_democar();
    const NocPlatform p(democar::build_democar_platform(2, 2, 3));
    CHECK(ga::gene_count(m) == 80);

    ga::Chromosome c;
    for (std::size_t i = 0; i < 80; ++i)
        c.genes.push_back(static_cast<std::uint32_t>(i % 3));
    const auto a = ga::decode(c, m, p);
    CHECK(a.runnable_core.size() == 18);
    CHECK(a.label_core.size() == 62);
    CHECK(a.runnable_core[1] == 1);
    CHECK(a.label_core[0] == p.active_cores()[18 % 3]);
    CHECK(ga::encode(a, m, p) == c);

    c.genes[5] = 3;  // only 3 active cores
    CHECK_THROWS_AS(ga::decode(c, m, p), std::invalid_argument);
    c.genes.pop_back();
    CHECK_THROWS_AS(ga::decode(c, m, p), std::invalid_argument);
    CHECK_THROWS_AS(ga::encode(io::single_core_allocation(m, 3), m, p), std::invalid_argument);
}

TEST_CASE("decode uses the active-core list")
{
    const auto m = democar::build_democar();
    auto mc = democar::build_democar_platform(2, 2, 4);
    mc.active = {false, true, false, true};
    const NocPlatform p(mc);
    ga::Chromosome c;
    c.genes.assign(80, 1);
    const auto a = ga::decode(c, m, p);
    CHECK(a.runnable_core[0] == 3);
}

TEST_CASE("fitness orders missed deadlines before makespan")
{
    CHECK(ga::Fitness{0, 999} < ga::Fitness{1, 1});
    CHECK(ga::Fitness{2, 5} < ga::Fitness{2, 6});
    CHECK(ga::Fitness{2, 5} == ga::Fitness{2, 5});
}

TEST_CASE("evaluate matches the simulator")
{
    const auto m = democar::build_democar();
    const NocPlatform p(democar::build_democar_platform(2, 2, 4));
    ga::Chromosome c;
    c.genes.assign(80, 0);
    const auto f = ga::evaluate(c, m, p);
    const auto r = sim::simulate(m, p, ga::decode(c, m, p));
    CHECK(f.missed == r.missed_deadlines);
    CHECK(f.makespan_ns == r.makespan_ns);
}

TEST_CASE("search finds the exhaustive optimum of a toy model")
{
    const auto m = toy_model();
    const auto p = toy_platform();
    std::size_t count = 0;
    const auto optimum = exhaustive_optimum(m, p, &count);
    CHECK(count == 2187);
    MESSAGE("optimum missed=" << optimum.missed << " makespan=" << optimum.makespan_ns);

    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ga::GaConfig c;
        c.generations = 60;
        c.population = 20;
        c.seed = seed;
        const auto h = ga::run(m, p, c);
        CAPTURE(seed);
        CHECK(h.best == optimum);
        CHECK(ga::evaluate(h.best_chromosome, m, p) == h.best);
    }
}

TEST_CASE("same seed, same history")
{
    const auto m = democar::build_democar();
    const NocPlatform p(democar::build_democar_platform(2, 2, 3));
    const auto h1 = ga::run(m, p, small_config(42));
    const auto h2 = ga::run(m, p, small_config(42));
    REQUIRE(h1.generations.size() == h2.generations.size());
    for (std::size_t i = 0; i < h1.generations.size(); ++i) {
        CHECK(h1.generations[i].best == h2.generations[i].best);
        CHECK(h1.generations[i].best_chromosome == h2.generations[i].best_chromosome);
    }
    std::ostringstream a, b;
    ga::write_history_csv(a, h1);
    ga::write_history_csv(b, h2);
    CHECK(a.str() == b.str());

    const auto other = ga::run(m, p, small_config(43));
    CHECK_FALSE(other.generations.back().best_chromosome == h1.generations.back().best_chromosome);
}

TEST_CASE("thread count does not change the search")
{
    const auto m = democar::build_democar();
    const NocPlatform p(democar::build_democar_platform(2, 2, 4));
    auto c = small_config(7);
    c.islands = 2;
    c.migration_interval = 3;
    const auto one = ga::run(m, p, c);
    c.threads = 4;
    const auto four = ga::run(m, p, c);
    REQUIRE(one.generations.size() == four.generations.size());
    for (std::size_t i = 0; i < one.generations.size(); ++i)
        CHECK(one.generations[i].best_chromosome == four.generations[i].best_chromosome);
    CHECK(one.evaluations == four.evaluations);
}

TEST_CASE("elitism keeps the best fitness non-increasing")
{
    const auto m = democar::build_democar();
    const NocPlatform p(democar::build_democar_platform(2, 2, 2));
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        auto c = small_config(seed);
        c.generations = 30;
        c.islands = 3;
        c.island_population = 6;
        c.migration_interval = 4;
        const auto h = ga::run(m, p, c);
        REQUIRE(h.generations.size() == 30);
        for (std::size_t i = 1; i < h.generations.size(); ++i) {
            CHECK(h.generations[i].generation == i + 1);
            CHECK(h.generations[i].best <= h.generations[i - 1].best);
            for (std::size_t k = 0; k < 3; ++k)
                CHECK(h.generations[i].island_best[k] <= h.generations[i - 1].island_best[k]);
        }
        CHECK(h.best == h.generations.back().best);
    }
}

TEST_CASE("every reported chromosome decodes to a valid allocation")
{
    const auto m = democar::build_democar();
    const NocPlatform p(democar::build_democar_platform(2, 2, 3));
    auto c = small_config(11);
    c.mutation_rate = 0.5;
    const auto h = ga::run(m, p, c);
    const sim::Simulator s(m, p);
    for (const auto& g : h.generations) {
        REQUIRE(g.best_chromosome.genes.size() == 80);
        for (auto gene : g.best_chromosome.genes)
            CHECK(gene < 3);
        const auto a = ga::decode(g.best_chromosome, m, p);
        CHECK_NOTHROW(s.check(a));
        CHECK(ga::evaluate(g.best_chromosome, s) == g.best);
    }
}

TEST_CASE("evaluation budget")
{
    const auto m = democar::build_democar();
    const NocPlatform p(democar::build_democar_platform(2, 2, 4));
    auto c = small_config(3);
    const auto h = ga::run(m, p, c);
    // initial population plus (population - elitism) children per generation
    CHECK(h.evaluations <= 10 + 14 * 9);
    CHECK(h.evaluations > 0);
}

TEST_CASE("history CSV")
{
    const auto m = democar::build_democar();
    const NocPlatform p(democar::build_democar_platform(2, 2, 4));
    auto c = small_config(1);
    c.generations = 3;
    const auto h = ga::run(m, p, c);
    std::ostringstream os;
    ga::write_history_csv(os, h);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "generation,best_missed,best_makespan_us");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(line.rfind(std::to_string(rows) + ",", 0) == 0);
    }
    CHECK(rows == 3);
    CHECK(ga::format_us(1'234'567) == "1234.567");
    CHECK(ga::format_us(5) == "0.005");
}

TEST_CASE("configuration checks")
{
    const auto m = democar::build_democar();
    const NocPlatform p(democar::build_democar_platform(2, 2, 4));
    auto bad = [&](auto mutate) {
        ga::GaConfig c;
        mutate(c);
        CHECK_THROWS_AS(ga::check_config(c), std::invalid_argument);
    };
    bad([](ga::GaConfig& c) { c.generations = 0; });
    bad([](ga::GaConfig& c) { c.population = 0; });
    bad([](ga::GaConfig& c) { c.elitism = 21; });
    bad([](ga::GaConfig& c) { c.crossover_rate = 1.5; });
    bad([](ga::GaConfig& c) { c.mutation_rate = -0.1; });
    bad([](ga::GaConfig& c) { c.tournament_size = 0; });
    bad([](ga::GaConfig& c) { c.islands = 0; });
    ga::GaConfig ok;
    CHECK_NOTHROW(ga::check_config(ok));
    ok.generations = 0;
    CHECK_THROWS_AS(ga::run(m, p, ok), std::invalid_argument);
}
