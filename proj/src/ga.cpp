#include "autobench/ga.hpp"

#include <algorithm>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <unordered_map>

namespace autobench::ga {

namespace {

// std::uniform_*_distribution is implementation-defined; these are not, so a
// seed gives the same search on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint32_t below(std::uint32_t n)
    {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t r;
        do
            r = engine_();
        while (r >= limit);
        return static_cast<std::uint32_t>(r % n);
    }

    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct GenesHash {
    std::size_t operator()(const std::vector<std::uint32_t>& g) const
    {
        std::uint64_t h = 0x84222325cbf29ce4ULL;
        for (auto v : g)
            h = splitmix(h ^ v);
        return static_cast<std::size_t>(h);
    }
};

struct Individual {
    Chromosome chromosome;
    Fitness fitness;
};

// Index of the best individual; ties go to the lower index.
std::size_t best_index(const std::vector<Individual>& pop)
{
    std::size_t b = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
        if (pop[i].fitness < pop[b].fitness)
            b = i;
    return b;
}

std::size_t worst_index(const std::vector<Individual>& pop)
{
    std::size_t w = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
        if (pop[w].fitness < pop[i].fitness)
            w = i;
    return w;
}

class Evaluator {
public:
    Evaluator(const sim::Simulator& simulator, unsigned threads)
        : simulator_(simulator), threads_(std::max(1u, threads))
    {
    }

    // Fills in fitness for every individual; results are independent of the
    // number of worker threads.
    void evaluate(std::vector<Individual*>& batch)
    {
        std::vector<std::size_t> todo;
        std::unordered_map<std::vector<std::uint32_t>, std::size_t, GenesHash> first_in_batch;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const auto& g = batch[i]->chromosome.genes;
            if (cache_.count(g) || first_in_batch.count(g))
                continue;
            first_in_batch.emplace(g, i);
            todo.push_back(i);
        }

        std::vector<Fitness> results(todo.size());
        auto work = [&](std::size_t begin, std::size_t step) {
            for (std::size_t k = begin; k < todo.size(); k += step)
                results[k] = ga::evaluate(batch[todo[k]]->chromosome, simulator_);
        };
        const unsigned n = std::min<unsigned>(threads_, static_cast<unsigned>(todo.size()));
        if (n <= 1) {
            work(0, 1);
        } else {
            std::vector<std::exception_ptr> errors(n);
            {
                std::vector<std::jthread> pool;
                for (unsigned t = 0; t < n; ++t)
                    pool.emplace_back([&, t] {
                        try {
                            work(t, n);
                        } catch (...) {
                            errors[t] = std::current_exception();
                        }
                    });
            }
            for (auto& e : errors)
                if (e)
                    std::rethrow_exception(e);
        }

        for (std::size_t k = 0; k < todo.size(); ++k)
            cache_.emplace(batch[todo[k]]->chromosome.genes, results[k]);
        evaluations_ += todo.size();
        for (auto* ind : batch)
            ind->fitness = cache_.at(ind->chromosome.genes);
    }

    std::size_t evaluations() const { return evaluations_; }

private:
    const sim::Simulator& simulator_;
    unsigned threads_;
    std::unordered_map<std::vector<std::uint32_t>, Fitness, GenesHash> cache_;
    std::size_t evaluations_ = 0;
};

}  // namespace

void check_config(const GaConfig& c)
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("GA config: " + what); };
    if (c.generations < 1)
        fail("generations must be positive");
    if (c.population < 1)
        fail("population must be positive");
    if (c.islands < 1)
        fail("islands must be positive");
    if (c.migration_interval < 1)
        fail("migration interval must be positive");
    if (c.tournament_size < 1)
        fail("tournament size must be positive");
    if (c.elitism < 1)
        fail("elitism must be positive");
    if (c.elitism > c.individuals_per_island())
        fail("elitism exceeds the island population");
    if (!(c.crossover_rate >= 0.0 && c.crossover_rate <= 1.0))
        fail("crossover rate must be within [0, 1]");
    if (c.mutation_rate && !(*c.mutation_rate >= 0.0 && *c.mutation_rate <= 1.0))
        fail("mutation rate must be within [0, 1]");
}

std::size_t gene_count(const AmaltheaModel& model)
{
    return model.runnable_count() + model.label_count();
}

sim::Allocation decode(const Chromosome& c, const AmaltheaModel& model, const NocPlatform& platform)
{
    if (c.genes.size() != gene_count(model))
        throw std::invalid_argument("chromosome has " + std::to_string(c.genes.size()) +
                                    " genes, model needs " + std::to_string(gene_count(model)));
    const auto& active = platform.active_cores();
    sim::Allocation a;
    a.runnable_core.reserve(model.runnable_count());
    a.label_core.reserve(model.label_count());
    for (std::size_t i = 0; i < c.genes.size(); ++i) {
        if (c.genes[i] >= active.size())
            throw std::invalid_argument("gene " + std::to_string(i) + " exceeds the " +
                                        std::to_string(active.size()) + " active cores");
        (i < model.runnable_count() ? a.runnable_core : a.label_core).push_back(active[c.genes[i]]);
    }
    return a;
}

Chromosome encode(const sim::Allocation& a, const AmaltheaModel& model, const NocPlatform& platform)
{
    if (a.runnable_core.size() != model.runnable_count() || a.label_core.size() != model.label_count())
        throw std::invalid_argument("allocation does not match the model");
    const auto& active = platform.active_cores();
    auto gene = [&](std::size_t core) {
        auto it = std::find(active.begin(), active.end(), core);
        if (it == active.end())
            throw std::invalid_argument("allocation uses a core that is not active");
        return static_cast<std::uint32_t>(it - active.begin());
    };
    Chromosome c;
    for (auto core : a.runnable_core)
        c.genes.push_back(gene(core));
    for (auto core : a.label_core)
        c.genes.push_back(gene(core));
    return c;
}

Fitness evaluate(const Chromosome& c, const sim::Simulator& simulator)
{
    const auto result = simulator.run(decode(c, simulator.model(), simulator.platform()));
    return {result.missed_deadlines, result.makespan_ns};
}

Fitness evaluate(const Chromosome& c, const AmaltheaModel& model, const NocPlatform& platform)
{
    return evaluate(c, sim::Simulator(model, platform));
}

GaHistory run(const AmaltheaModel& model, const NocPlatform& platform, const GaConfig& config)
{
    check_config(config);
    const sim::Simulator simulator(model, platform);
    Evaluator evaluator(simulator, config.threads);

    const std::size_t length = gene_count(model);
    const auto n_cores = static_cast<std::uint32_t>(platform.active_cores().size());
    const std::size_t per_island = config.individuals_per_island();
    const double mutation = config.mutation_rate.value_or(length ? 1.0 / length : 0.0);

    std::vector<Rng> rngs;
    for (std::size_t i = 0; i < config.islands; ++i)
        rngs.emplace_back(splitmix(config.seed ^ splitmix(i + 1)));

    std::vector<std::vector<Individual>> islands(config.islands);
    for (std::size_t i = 0; i < config.islands; ++i)
        for (std::size_t k = 0; k < per_island; ++k) {
            Individual ind;
            ind.chromosome.genes.resize(length);
            for (auto& g : ind.chromosome.genes)
                g = rngs[i].below(n_cores);
            islands[i].push_back(std::move(ind));
        }

    auto evaluate_all = [&](std::vector<std::vector<Individual>>& pops, std::size_t skip) {
        std::vector<Individual*> batch;
        for (auto& pop : pops)
            for (std::size_t k = skip; k < pop.size(); ++k)
                batch.push_back(&pop[k]);
        evaluator.evaluate(batch);
    };

    auto tournament = [&](const std::vector<Individual>& pop, Rng& rng) -> const Individual& {
        std::size_t winner = rng.below(static_cast<std::uint32_t>(pop.size()));
        for (std::size_t k = 1; k < config.tournament_size; ++k) {
            const std::size_t other = rng.below(static_cast<std::uint32_t>(pop.size()));
            if (pop[other].fitness < pop[winner].fitness ||
                (!(pop[winner].fitness < pop[other].fitness) && other < winner))
                winner = other;
        }
        return pop[winner];
    };

    GaHistory history;
    auto record = [&](std::size_t generation) {
        GenerationRecord rec;
        rec.generation = generation;
        for (const auto& pop : islands) {
            const auto& b = pop[best_index(pop)];
            rec.island_best.push_back(b.fitness);
            if (rec.island_best.size() == 1 || b.fitness < rec.best) {
                rec.best = b.fitness;
                rec.best_chromosome = b.chromosome;
            }
        }
        history.generations.push_back(std::move(rec));
    };

    evaluate_all(islands, 0);
    record(1);

    const std::size_t elite = std::min(config.elitism, per_island);
    for (std::size_t generation = 2; generation <= config.generations; ++generation) {
        std::vector<std::vector<Individual>> next(config.islands);
        for (std::size_t i = 0; i < config.islands; ++i) {
            const auto& pop = islands[i];
            Rng& rng = rngs[i];

            std::vector<std::size_t> order(pop.size());
            for (std::size_t k = 0; k < order.size(); ++k)
                order[k] = k;
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return pop[a].fitness < pop[b].fitness;
            });
            for (std::size_t k = 0; k < elite; ++k)
                next[i].push_back(pop[order[k]]);

            while (next[i].size() < per_island) {
                const Individual& a = tournament(pop, rng);
                const Individual& b = tournament(pop, rng);
                Individual child;
                child.chromosome = a.chromosome;
                if (length > 1 && rng.unit() < config.crossover_rate) {
                    const std::size_t cut = 1 + rng.below(static_cast<std::uint32_t>(length - 1));
                    std::copy(b.chromosome.genes.begin() + static_cast<std::ptrdiff_t>(cut),
                              b.chromosome.genes.end(),
                              child.chromosome.genes.begin() + static_cast<std::ptrdiff_t>(cut));
                }
                for (auto& g : child.chromosome.genes)
                    if (rng.unit() < mutation)
                        g = rng.below(n_cores);
                next[i].push_back(std::move(child));
            }
        }
        evaluate_all(next, elite);
        islands = std::move(next);

        if (config.islands > 1 && generation % config.migration_interval == 0) {
            std::vector<Individual> emigrants;
            for (const auto& pop : islands)
                emigrants.push_back(pop[best_index(pop)]);
            for (std::size_t i = 0; i < config.islands; ++i) {
                auto& dest = islands[(i + 1) % config.islands];
                const std::size_t w = worst_index(dest);
                if (emigrants[i].fitness < dest[w].fitness)
                    dest[w] = emigrants[i];
            }
        }
        record(generation);
    }

    history.best = history.generations.back().best;
    history.best_chromosome = history.generations.back().best_chromosome;
    history.evaluations = evaluator.evaluations();
    return history;
}

std::string format_us(Nanos ns)
{
    const bool negative = ns < 0;
    const Nanos a = negative ? -ns : ns;
    std::string frac = std::to_string(a % 1000);
    frac.insert(0, 3 - frac.size(), '0');
    return (negative ? "-" : "") + std::to_string(a / 1000) + "." + frac;
}

void write_history_csv(std::ostream& out, const GaHistory& history)
{
    out << "generation,best_missed,best_makespan_us\n";
    for (const auto& g : history.generations)
        out << g.generation << ',' << g.best.missed << ',' << format_us(g.best.makespan_ns) << '\n';
}

}  // namespace autobench::ga
