#pragma once

// The DemoCar engine-control benchmark: 6 tasks, 18 runnables, 62 labels.

#include "autobench/model.hpp"
#include "autobench/noc.hpp"

namespace autobench::democar {

// Clock of the generated cores. See README ("Platform calibration") for why
// the defaults are not 1 tick/instruction.
struct ClockOptions {
    std::uint32_t ticks_per_instruction = 44;
    std::uint64_t frequency_hz = 200'000'000;
};

struct Options {
    // Period of the environment (crank) events that release
    // CylNumTriggeredTask; nothing in the model writes CylinderNumber.
    Micros crank_period_us = 2'500;
    // Hardware section carried by the model itself.
    int mesh_width = 2;
    int mesh_height = 2;
    ClockOptions clock;
};

AmaltheaModel build_democar(const Options& options = {});

// width*height cores in row-major order at (x, y), all sharing one core type
// and one quartz; the first `active` cores in row-major order are active.
// Throws std::invalid_argument unless 1 <= active <= width*height.
MeshCores build_democar_platform(int width, int height, int active, const ClockOptions& clock = {});

// Adds the cores of `mesh` (with their core types and quartzes) to `model`.
void install_hardware(AmaltheaModel& model, const MeshCores& mesh);

}  // namespace autobench::democar
