#pragma once

// Genetic search over joint runnable + label allocations.
//
// A chromosome holds one gene per runnable followed by one gene per label
// (model order); each gene indexes the platform's active-core list. Fitness
// is (missed deadlines, makespan) compared lexicographically, smaller is
// better, from a WCET simulation of one hyperperiod.

#include "autobench/model.hpp"
#include "autobench/noc.hpp"
#include "autobench/sim.hpp"

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace autobench::ga {

struct Chromosome {
    std::vector<std::uint32_t> genes;
    bool operator==(const Chromosome&) const = default;
};

struct Fitness {
    std::size_t missed = 0;
    Nanos makespan_ns = 0;

    auto operator<=>(const Fitness&) const = default;
};

struct GaConfig {
    std::size_t generations = 100;  // including the initial population
    std::size_t population = 20;    // per island when islands == 1
    std::size_t islands = 1;
    std::size_t island_population = 0;  // 0: same as population
    std::size_t migration_interval = 10;
    double crossover_rate = 0.9;
    std::optional<double> mutation_rate;  // per gene; default 1 / gene count
    std::size_t elitism = 1;
    std::size_t tournament_size = 2;
    std::uint64_t seed = 1;
    unsigned threads = 1;  // fitness evaluation workers; never changes results

    std::size_t individuals_per_island() const
    {
        return islands > 1 && island_population > 0 ? island_population : population;
    }
};

// Throws std::invalid_argument describing the first bad field.
void check_config(const GaConfig& config);

struct GenerationRecord {
    std::size_t generation = 0;  // 1-based
    Fitness best;
    Chromosome best_chromosome;
    std::vector<Fitness> island_best;
};

struct GaHistory {
    std::vector<GenerationRecord> generations;
    Fitness best;
    Chromosome best_chromosome;
    std::size_t evaluations = 0;  // distinct simulations run
};

std::size_t gene_count(const AmaltheaModel& model);

// Throws std::invalid_argument on a length mismatch or a gene outside the
// active-core list.
sim::Allocation decode(const Chromosome& c, const AmaltheaModel& model, const NocPlatform& platform);

// Inverse of decode; throws std::invalid_argument if the allocation uses an
// inactive core or has the wrong shape.
Chromosome encode(const sim::Allocation& a, const AmaltheaModel& model, const NocPlatform& platform);

Fitness evaluate(const Chromosome& c, const sim::Simulator& simulator);
Fitness evaluate(const Chromosome& c, const AmaltheaModel& model, const NocPlatform& platform);

GaHistory run(const AmaltheaModel& model, const NocPlatform& platform, const GaConfig& config);

// Header: generation,best_missed,best_makespan_us
void write_history_csv(std::ostream& out, const GaHistory& history);

// Makespan in µs with three decimals, e.g. "1234.567".
std::string format_us(Nanos ns);

}  // namespace autobench::ga
