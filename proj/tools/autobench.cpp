// autobench: DemoCar generation, model validation/inspection, allocation
// evaluation and GA optimization.
//
// Exit codes: 0 success, 1 negative verdict (violations, missed deadlines),
// 2 usage error, 3 I/O or parse failure.

#include "CLI11.hpp"

#include "autobench/democar.hpp"
#include "autobench/ga.hpp"
#include "autobench/io.hpp"
#include "autobench/model.hpp"
#include "autobench/noc.hpp"
#include "autobench/sim.hpp"
#include "autobench/xml.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace autobench;

namespace {

constexpr int kOk = 0;
constexpr int kNegative = 1;
constexpr int kUsage = 2;
constexpr int kFailure = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MeshFlags {
    std::string mesh = "2x2";
    int active = 0;  // 0: all
    Nanos hop_ns = NocParams{}.hop_latency_ns;
    std::uint32_t flit_bits = NocParams{}.flit_bits;

    void add(CLI::App* cmd, bool required)
    {
        auto* m = cmd->add_option("--mesh", mesh, "Mesh size WxH");
        auto* a = cmd->add_option("--active", active, "Active cores (row-major), default all");
        if (required) {
            m->required();
            a->required();
        }
        cmd->add_option("--hop-ns", hop_ns, "Per-hop, per-flit latency in ns")->check(CLI::PositiveNumber);
        cmd->add_option("--flit-bits", flit_bits, "Flit width in bits")->check(CLI::PositiveNumber);
    }

    std::pair<int, int> dims() const
    {
        const auto x = mesh.find_first_of("xX");
        int w = 0, h = 0;
        try {
            std::size_t used = 0;
            w = std::stoi(mesh.substr(0, x), &used);
            if (x == std::string::npos || used != x)
                throw std::invalid_argument(mesh);
            h = std::stoi(mesh.substr(x + 1), &used);
            if (used != mesh.size() - x - 1)
                throw std::invalid_argument(mesh);
        } catch (const std::exception&) {
            throw UsageError("--mesh expects WxH, got '" + mesh + "'");
        }
        if (w < 1 || h < 1)
            throw UsageError("--mesh dimensions must be positive");
        return {w, h};
    }

    // Uses the model's own cores when they tile the mesh, otherwise
    // generates a uniform mesh clocked like the model's first core.
    NocPlatform platform(const AmaltheaModel& model) const
    {
        const auto [w, h] = dims();
        const int n = active == 0 ? w * h : active;
        if (n < 1 || n > w * h)
            throw UsageError("--active must be within 1.." + std::to_string(w * h));
        const NocParams params{hop_ns, flit_bits};
        if (auto mesh_cores = mesh_from_model(model, w, h, n))
            return NocPlatform(std::move(*mesh_cores), params);
        democar::ClockOptions clock;
        if (model.core_type_count() > 0 && model.quartz_count() > 0) {
            clock.ticks_per_instruction = model.core_type(0).ticks_per_instruction;
            clock.frequency_hz = model.quartz(0).frequency_hz;
        }
        return NocPlatform(democar::build_democar_platform(w, h, n, clock), params);
    }
};

AmaltheaModel load(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        auto result = xml::parse(buf.str());
        for (const auto& w : result.warnings)
            std::cerr << path << ":" << w.line << ":" << w.column << ": warning: " << w.message << "\n";
        return std::move(result.model);
    } catch (const xml::ParseFailure& f) {
        for (const auto& e : f.errors())
            std::cerr << path << ":" << e.line << ":" << e.column << ": " << xml::to_string(e.kind)
                      << ": " << e.message << "\n";
        throw IoError(std::to_string(f.errors().size()) + " parse error(s) in '" + path + "'");
    }
}

void write_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << content) || !out.flush())
        throw IoError("cannot write '" + path + "'");
}

std::string describe(const Stimulus& s)
{
    std::ostringstream os;
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Periodic>)
                os << "period " << k.period << " us" << (k.offset ? ", offset " + std::to_string(k.offset) + " us" : "");
            else if constexpr (std::is_same_v<K, Sporadic>)
                os << "sporadic, min inter-arrival " << k.min_inter_arrival << " us";
            else if constexpr (std::is_same_v<K, Single>)
                os << "single at " << k.time << " us";
            else if constexpr (std::is_same_v<K, Pattern>)
                os << "pattern of " << k.times.size() << " activations";
            else {
                os << "on write of " << k.trigger_label;
                if (k.injection_period)
                    os << ", injected every " << *k.injection_period << " us";
            }
        },
        s.kind);
    return os.str();
}

std::string join_names(const AmaltheaModel& m, const std::vector<std::string>& label_ids)
{
    std::string out;
    for (const auto& id : label_ids) {
        const Label* l = m.find_label(id);
        out += (out.empty() ? "" : ",") + (l ? l->name : id);
    }
    return out.empty() ? "-" : out;
}

int cmd_democar_emit(const std::string& out, const democar::Options& options)
{
    write_file(out, xml::serialize(democar::build_democar(options)));
    std::cout << "wrote " << out << "\n";
    return kOk;
}

int cmd_validate(const std::string& path)
{
    const auto model = load(path);
    const auto violations = validate(model);
    for (const auto& v : violations)
        std::cout << v.entity << ": " << v.rule << ": " << v.message << "\n";
    std::cout << violations.size() << " violation(s)\n";
    return violations.empty() ? kOk : kNegative;
}

int cmd_inspect(const std::string& path, bool tables)
{
    const auto m = load(path);
    std::cout << "tasks: " << m.task_count() << "\n"
              << "runnables: " << m.runnable_count() << "\n"
              << "labels: " << m.label_count() << "\n"
              << "stimuli: " << m.stimulus_count() << "\n"
              << "cores: " << m.core_count() << "\n";
    try {
        std::cout << "hyperperiod: " << hyperperiod(m) << " us\n";
    } catch (const std::domain_error& e) {
        std::cout << "hyperperiod: none (" << e.what() << ")\n";
    }
    if (!tables)
        return kOk;

    std::cout << "\n" << std::left << std::setw(24) << "Task" << std::setw(48) << "Activation"
              << "Priority\n";
    for (const auto& t : m.tasks()) {
        const Stimulus* s = m.find_stimulus(t.stimulus);
        std::cout << std::setw(24) << t.name << std::setw(48) << (s ? describe(*s) : "?")
                  << t.priority << "\n";
    }

    std::cout << "\nTask,Runnable,Size,Reads,Writes,BCET,WCET\n";
    for (const auto& t : m.tasks())
        for (const auto& rid : t.runnables) {
            const Runnable& r = *m.find_runnable(rid);
            std::cout << t.name << "," << r.name << "," << r.size_bits << "," << join_names(m, r.reads)
                      << "," << join_names(m, r.writes) << "," << r.bcet_instructions << ","
                      << r.wcet_instructions << "\n";
        }

    std::cout << "\n" << std::setw(32) << "Label" << "Bits\n";
    for (const auto& l : m.labels())
        std::cout << std::setw(32) << l.name << l.bit_length << "\n";
    return kOk;
}

struct EvaluateFlags {
    std::string model;
    std::string alloc;
    std::string all_on;
    std::string trace;
    std::string mode = "wcet";
    bool non_preemptive = false;
    MeshFlags mesh;
};

int cmd_evaluate(const EvaluateFlags& f)
{
    const auto model = load(f.model);
    const auto platform = f.mesh.platform(model);

    sim::Allocation alloc;
    if (!f.all_on.empty()) {
        const auto core = platform.find_core_by_name(f.all_on);
        if (!core)
            throw UsageError("--all-on: no core named '" + f.all_on + "'");
        alloc = io::single_core_allocation(model, *core);
    } else {
        std::ifstream in(f.alloc);
        if (!in)
            throw IoError("cannot open '" + f.alloc + "'");
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw IoError("'" + f.alloc + "' is not valid JSON: " + e.what());
        }
        try {
            alloc = io::allocation_from_json(doc, model, platform);
        } catch (const std::invalid_argument& e) {
            throw UsageError(std::string("invalid allocation: ") + e.what());
        }
    }

    sim::SimOptions options;
    options.mode = f.mode == "bcet" ? Bound::BCET : Bound::WCET;
    options.preemptive = !f.non_preemptive;
    sim::SimResult result;
    try {
        result = sim::simulate(model, platform, alloc, options);
    } catch (const sim::ActivationStorm&) {
        throw;
    } catch (const sim::SimError& e) {
        throw UsageError(std::string("invalid allocation: ") + e.what());
    }

    if (!f.trace.empty()) {
        std::ostringstream csv;
        io::write_trace_csv(csv, result, model, platform);
        write_file(f.trace, csv.str());
    }
    const auto d = sim::count_deadlines(result);
    std::cout << "jobs: " << result.jobs.size() << "\n"
              << "missed deadlines: " << d.missed << " / " << d.total << "\n"
              << "makespan: " << ga::format_us(result.makespan_ns) << " us\n";
    return d.missed == 0 ? kOk : kNegative;
}

struct OptimizeFlags {
    std::string model;
    std::string csv;
    std::string best_alloc;
    MeshFlags mesh;
    ga::GaConfig ga;
    double mutation_rate = -1;
};

int cmd_optimize(OptimizeFlags f)
{
    const auto model = load(f.model);
    const auto platform = f.mesh.platform(model);
    if (f.mutation_rate >= 0)
        f.ga.mutation_rate = f.mutation_rate;
    try {
        ga::check_config(f.ga);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    const auto history = ga::run(model, platform, f.ga);

    std::ostringstream csv;
    ga::write_history_csv(csv, history);
    write_file(f.csv, csv.str());
    if (!f.best_alloc.empty()) {
        const auto alloc = ga::decode(history.best_chromosome, model, platform);
        write_file(f.best_alloc, io::allocation_to_json(alloc, model, platform).dump(2) + "\n");
    }

    std::size_t first_zero = 0;
    for (const auto& g : history.generations)
        if (g.best.missed == 0) {
            first_zero = g.generation;
            break;
        }
    std::cout << "generations: " << history.generations.size() << "\n"
              << "evaluations: " << history.evaluations << "\n"
              << "best missed deadlines: " << history.best.missed << "\n"
              << "best makespan: " << ga::format_us(history.best.makespan_ns) << " us\n";
    if (first_zero)
        std::cout << "first fully schedulable generation: " << first_zero << "\n";
    else
        std::cout << "no fully schedulable allocation found\n";
    return history.best.missed == 0 ? kOk : kNegative;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"AMALTHEA-style model tooling and NoC allocation search"};
    app.require_subcommand(1);

    std::string emit_out;
    democar::Options emit_options;
    auto* emit = app.add_subcommand("democar-emit", "Write the DemoCar model as XML");
    emit->add_option("--out", emit_out, "Output file")->required();
    emit->add_option("--crank-us", emit_options.crank_period_us, "Crank event period in us")
        ->check(CLI::PositiveNumber);
    emit->add_option("--ticks", emit_options.clock.ticks_per_instruction, "Clock ticks per instruction")
        ->check(CLI::PositiveNumber);
    emit->add_option("--freq-hz", emit_options.clock.frequency_hz, "Core clock frequency in Hz")
        ->check(CLI::PositiveNumber);

    std::string validate_path;
    auto* val = app.add_subcommand("validate", "Parse a model and report invariant violations");
    val->add_option("model", validate_path, "Model file")->required();

    std::string inspect_path;
    bool tables = false;
    auto* insp = app.add_subcommand("inspect", "Summarize a model");
    insp->add_option("model", inspect_path, "Model file")->required();
    insp->add_flag("--tables", tables, "Print task, runnable and label tables");

    EvaluateFlags ef;
    auto* ev = app.add_subcommand("evaluate", "Simulate one hyperperiod of an allocation");
    ev->add_option("model", ef.model, "Model file")->required();
    auto* alloc_opt = ev->add_option("--alloc", ef.alloc, "Allocation JSON");
    auto* all_on_opt = ev->add_option("--all-on", ef.all_on, "Put everything on the named core");
    alloc_opt->excludes(all_on_opt);
    ev->add_option("--trace", ef.trace, "Write per-job trace CSV");
    ev->add_option("--mode", ef.mode, "Execution bound")->check(CLI::IsMember({"wcet", "bcet"}));
    ev->add_flag("--non-preemptive", ef.non_preemptive, "Run jobs to completion once started");
    ef.mesh.add(ev, true);

    OptimizeFlags of;
    auto* opt = app.add_subcommand("optimize", "Search allocations with the genetic algorithm");
    opt->add_option("model", of.model, "Model file")->required();
    of.mesh.add(opt, true);
    opt->add_option("--generations", of.ga.generations, "Generations (initial population included)")
        ->required()->check(CLI::PositiveNumber);
    opt->add_option("--pop", of.ga.population, "Population size")->required()->check(CLI::PositiveNumber);
    opt->add_option("--islands", of.ga.islands, "Island count")->check(CLI::PositiveNumber);
    opt->add_option("--island-pop", of.ga.island_population, "Individuals per island")->check(CLI::PositiveNumber);
    opt->add_option("--migrate", of.ga.migration_interval, "Migration interval in generations")
        ->check(CLI::PositiveNumber);
    opt->add_option("--crossover", of.ga.crossover_rate, "Crossover rate")->check(CLI::Range(0.0, 1.0));
    opt->add_option("--mutation", of.mutation_rate, "Per-gene mutation rate (default 1/genes)")
        ->check(CLI::Range(0.0, 1.0));
    opt->add_option("--elitism", of.ga.elitism, "Elite individuals per island")->check(CLI::PositiveNumber);
    opt->add_option("--tournament", of.ga.tournament_size, "Tournament size")->check(CLI::PositiveNumber);
    opt->add_option("--seed", of.ga.seed, "Random seed")->required();
    opt->add_option("--threads", of.ga.threads, "Fitness evaluation threads")->check(CLI::PositiveNumber);
    opt->add_option("--csv", of.csv, "Per-generation CSV output")->required();
    opt->add_option("--best-alloc", of.best_alloc, "Write the best allocation as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*emit)
            return cmd_democar_emit(emit_out, emit_options);
        if (*val)
            return cmd_validate(validate_path);
        if (*insp)
            return cmd_inspect(inspect_path, tables);
        if (*ev) {
            if (ef.alloc.empty() && ef.all_on.empty())
                throw UsageError("evaluate needs --alloc or --all-on");
            return cmd_evaluate(ef);
        }
        if (*opt)
            return cmd_optimize(of);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kUsage;
}
