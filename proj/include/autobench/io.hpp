#pragma once

// File formats around the simulator: allocation JSON and job-trace CSV.
//
// Allocation JSON:  {"runnables": {"<runnable name>": "<core name>", ...},
//                    "labels":    {"<label name>":    "<core name>", ...}}
// Trace CSV header: task,runnable,core,release_ns,start_ns,finish_ns,deadline_ns,missed

#include "autobench/model.hpp"
#include "autobench/noc.hpp"
#include "autobench/sim.hpp"

#include "json.hpp"

#include <iosfwd>

namespace autobench::io {

nlohmann::json allocation_to_json(const sim::Allocation& allocation, const AmaltheaModel& model,
                                  const NocPlatform& platform);

// Every runnable and label must be mapped to a core of the platform; throws
// std::invalid_argument naming the first problem found.
sim::Allocation allocation_from_json(const nlohmann::json& doc, const AmaltheaModel& model,
                                     const NocPlatform& platform);

// Every runnable and label on one core.
sim::Allocation single_core_allocation(const AmaltheaModel& model, std::size_t core);

void write_trace_csv(std::ostream& out, const sim::SimResult& result, const AmaltheaModel& model,
                     const NocPlatform& platform);

}  // namespace autobench::io
