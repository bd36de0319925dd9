#include "autobench/io.hpp"

#include <algorithm>
#include <ostream>

namespace autobench::io {

nlohmann::json allocation_to_json(const sim::Allocation& allocation, const AmaltheaModel& model,
                                  const NocPlatform& platform)
{
    nlohmann::json runnables = nlohmann::json::object();
    nlohmann::json labels = nlohmann::json::object();
    for (std::size_t i = 0; i < model.runnable_count(); ++i)
        runnables[model.runnable(i).name] = platform.core(allocation.runnable_core.at(i)).name;
    for (std::size_t i = 0; i < model.label_count(); ++i)
        labels[model.label(i).name] = platform.core(allocation.label_core.at(i)).name;
    return {{"runnables", runnables}, {"labels", labels}};
}

namespace {

std::vector<std::size_t> read_map(const nlohmann::json& doc, const char* key,
                                  const std::vector<std::string>& names, const NocPlatform& platform)
{
    if (!doc.is_object() || !doc.contains(key) || !doc.at(key).is_object())
        throw std::invalid_argument(std::string("allocation needs an object \"") + key + "\"");
    const auto& map = doc.at(key);
    std::vector<std::size_t> out;
    for (const auto& name : names) {
        auto it = map.find(name);
        if (it == map.end())
            throw std::invalid_argument(std::string(key) + " entry for '" + name + "' is missing");
        if (!it->is_string())
            throw std::invalid_argument(std::string(key) + " entry for '" + name + "' must be a core name");
        const auto core = platform.find_core_by_name(it->get<std::string>());
        if (!core)
            throw std::invalid_argument("'" + name + "' is mapped to unknown core '" +
                                        it->get<std::string>() + "'");
        out.push_back(*core);
    }
    for (auto it = map.begin(); it != map.end(); ++it)
        if (std::find(names.begin(), names.end(), it.key()) == names.end())
            throw std::invalid_argument(std::string(key) + " entry '" + it.key() +
                                        "' names no entity of the model");
    return out;
}

}  // namespace

sim::Allocation allocation_from_json(const nlohmann::json& doc, const AmaltheaModel& model,
                                     const NocPlatform& platform)
{
    std::vector<std::string> runnables, labels;
    for (const auto& r : model.runnables())
        runnables.push_back(r.name);
    for (const auto& l : model.labels())
        labels.push_back(l.name);
    sim::Allocation a;
    a.runnable_core = read_map(doc, "runnables", runnables, platform);
    a.label_core = read_map(doc, "labels", labels, platform);
    return a;
}

sim::Allocation single_core_allocation(const AmaltheaModel& model, std::size_t core)
{
    return {std::vector<std::size_t>(model.runnable_count(), core),
            std::vector<std::size_t>(model.label_count(), core)};
}

void write_trace_csv(std::ostream& out, const sim::SimResult& result, const AmaltheaModel& model,
                     const NocPlatform& platform)
{
    out << "task,runnable,core,release_ns,start_ns,finish_ns,deadline_ns,missed\n";
    for (const auto& j : result.jobs) {
        out << model.task(j.task).name << ',' << model.runnable(j.runnable).name << ','
            << platform.core(j.core).name << ',' << j.release_ns << ',' << j.start_ns << ','
            << j.finish_ns << ',';
        if (j.absolute_deadline_ns)
            out << *j.absolute_deadline_ns;
        out << ',' << (j.missed ? 1 : 0) << '\n';
    }
}

}  // namespace autobench::io
