#include "autobench/democar.hpp"

#include <string_view>

namespace autobench::democar {

namespace {

struct LabelRow {
    std::string_view name;
    std::uint32_t bits;
};

// Label table in its printed (alphabetical) order.
constexpr LabelRow kLabels[] = {
    {"AcceleratorPedalPosition1", 16}, {"AcceleratorPedalPosition2", 16},
    {"AcceleratorPedalPositions", 16}, {"AFRFeedbackFlag", 1},
    {"BaseFuelMassPerStroke", 16},     {"BatteryVoltage", 16},
    {"BatVoltCorr", 16},               {"CoolantTemperature", 8},
    {"CrankFlag", 1},                  {"CylinderNumber", 8},
    {"DesiredThrottlePos", 16},        {"DesiredThrottlePosOut", 16},
    {"EngineSpeed", 16},               {"FuelEnabled", 1},
    {"IdleFlag", 1},                   {"IdleIgnitionCorrection", 8},
    {"IdleOLFlag", 1},                 {"IdleSpeedSetpoint", 16},
    {"IdleThrottleCorrection", 16},    {"IgnitionOn", 1},
    {"IgnitionTime1", 16},             {"IgnitionTime2", 16},
    {"IgnitionTime3", 16},             {"IgnitionTime4", 16},
    {"IgnitionTime5", 16},             {"IgnitionTime6", 16},
    {"IgnitionTime7", 16},             {"IgnitionTime8", 16},
    {"IgnitionTiming", 8},             {"InjTimeCyl1", 16},
    {"InjTimeCyl2", 16},               {"InjTimeCyl3", 16},
    {"InjTimeCyl4", 16},               {"InjTimeCyl5", 16},
    {"InjTimeCyl6", 16},               {"InjTimeCyl7", 16},
    {"InjTimeCyl8", 16},               {"InletAirTemperature", 8},
    {"LambdaCat1", 16},                {"LambdaCat2", 16},
    {"MafRateOut", 16},                {"MAFSensor", 16},
    {"MAFSensorVoltage", 8},           {"OverrunFlag", 1},
    {"OverrunFuelShutoffFlag", 1},     {"OverrunIgnitionRetard", 8},
    {"PedalAngle1", 16},               {"PedalAngle2", 16},
    {"PowerUpComplete", 1},            {"RateOfThrottleChange", 16},
    {"ThrottleAngle1", 16},            {"ThrottleAngle2", 16},
    {"ThrottleImpulseBeta1", 16},      {"ThrottleImpulseBeta2", 16},
    {"ThrottlePosition1", 16},         {"ThrottlePosition2", 16},
    {"TotalFuelMassPerStroke", 16},    {"TransientFuelMassPerStroke", 16},
    {"TriggeredCylinderNumber", 8},    {"UpdatePeriod", 16},
    {"VehicleSpeed", 16},              {"VotedPedalPosition", 16},
};

struct RunnableRow {
    std::string_view task;
    std::string_view name;
    std::uint64_t size_bits;
    std::vector<std::string_view> reads;
    std::vector<std::string_view> writes;
    std::uint64_t bcet;
    std::uint64_t wcet;
};

// Runnable table, grouped by task in execution order.
const std::vector<RunnableRow>& runnable_rows()
{
    static const std::vector<RunnableRow> rows = {
        {"CylNumTriggeredTask", "CylNumObserverEntity", 55600,
         {"CylinderNumber"}, {"TriggeredCylinderNumber"}, 434, 1145},

        {"ActuatorTask", "IgnitionSWCSyncEntity", 72512,
         {"IgnitionTiming", "EngineSpeed", "TriggeredCylinderNumber"},
         {"IgnitionTime1", "IgnitionTime2", "IgnitionTime3", "IgnitionTime4", "IgnitionTime5",
          "IgnitionTime6", "IgnitionTime7", "IgnitionTime8"},
         2728, 4921},
        {"ActuatorTask", "InjectionSWCSync", 69824,
         {"TotalFuelMassPerStroke", "CrankFlag", "TriggeredCylinderNumber", "EngineSpeed",
          "BatVoltCorr"},
         {"InjTimeCyl1", "InjTimeCyl2", "InjTimeCyl3", "InjTimeCyl4", "InjTimeCyl5", "InjTimeCyl6",
          "InjTimeCyl7", "InjTimeCyl8"},
         1644, 3302},

        {"Task5ms", "MassAirFlowSWCEntity", 56608, {"MAFSensorVoltage"}, {"MAFSensor"}, 55, 172},
        {"Task5ms", "ThrottleSensSWCEntity", 58816, {"ThrottleAngle1", "ThrottleAngle2"},
         {"ThrottlePosition1", "ThrottlePosition2"}, 113, 337},
        {"Task5ms", "APedSensor", 66288, {"PedalAngle1", "PedalAngle2"},
         {"AcceleratorPedalPosition1", "AcceleratorPedalPosition2"}, 555, 964},

        {"Task10ms", "APedVoterSWCEntity", 56832,
         {"AcceleratorPedalPosition1", "AcceleratorPedalPosition2"}, {"VotedPedalPosition"}, 87, 287},
        {"Task10ms", "ThrottleCtrlEntity", 70944,
         {"CoolantTemperature", "EngineSpeed", "MAFSensor", "ThrottlePosition1", "ThrottlePosition2"},
         {"BaseFuelMassPerStroke", "MafRateOut"}, 3664, 5783},
        {"Task10ms", "ThrottleActuatorEntity", 128464,
         {"CoolantTemperature", "CrankFlag", "DesiredThrottlePosOut", "EngineSpeed", "FuelEnabled",
          "InletAirTemperature", "OverrunFlag", "UpdatePeriod"},
         {"RateOfThrottleChange", "ThrottleImpulseBeta1", "ThrottleImpulseBeta2"}, 3788, 5913},
        {"Task10ms", "BaseFuelMassEntity", 70944,
         {"CoolantTemperature", "EngineSpeed", "MAFSensor", "ThrottlePosition1", "ThrottlePosition2"},
         {"BaseFuelMassPerStroke", "MafRateOut"}, 3664, 5783},
        {"Task10ms", "ThrottleChangeSWCEntity", 128464,
         {"CoolantTemperature", "CrankFlag", "DesiredThrottlePosOut", "EngineSpeed", "FuelEnabled",
          "InletAirTemperature", "OverrunFlag", "UpdatePeriod"},
         {"RateOfThrottleChange", "ThrottleImpulseBeta1", "ThrottleImpulseBeta2"}, 3788, 5913},
        {"Task10ms", "TransFuelMassSWCEntity", 128464,
         {"InletAirTemperature", "CoolantTemperature", "MafRateOut", "EngineSpeed", "UpdatePeriod",
          "RateOfThrottleChange", "ThrottleImpulseBeta1", "ThrottleImpulseBeta2",
          "OverrunFuelShutoffFlag", "CrankFlag", "FuelEnabled", "BaseFuelMassPerStroke"},
         {"TransientFuelMassPerStroke"}, 3985, 6376},
        {"Task10ms", "IgnitionSWCEntity", 66784,
         {"CrankFlag", "MafRateOut", "EngineSpeed", "InletAirTemperature", "OverrunIgnitionRetard",
          "IdleFlag", "IdleOLFlag", "IdleIgnitionCorrection", "CoolantTemperature"},
         {"IgnitionTiming"}, 3047, 4537},
        {"Task10ms", "TotalFuelMassSWCEntity", 66432,
         {"CrankFlag", "LambdaCat1", "LambdaCat2", "CoolantTemperature", "OverrunFuelShutoffFlag",
          "TransientFuelMassPerStroke"},
         {"TotalFuelMassPerStroke"}, 743, 1354},

        {"Task20ms", "OperatingModeSWCEntity", 139392,
         {"EngineSpeed", "VehicleSpeed", "IgnitionOn", "PowerUpComplete", "VotedPedalPosition",
          "IdleSpeedSetpoint"},
         {"OverrunFuelShutoffFlag", "IdleFlag", "IdleOLFlag", "CrankFlag", "OverrunFlag",
          "FuelEnabled", "AFRFeedbackFlag", "OverrunIgnitionRetard", "UpdatePeriod"},
         18612, 39281},
        {"Task20ms", "IdleSpeedCtrlSWCEntity", 66976, {"IdleFlag", "EngineSpeed", "CoolantTemperature"},
         {"IdleSpeedSetpoint", "IdleThrottleCorrection", "IdleIgnitionCorrection"}, 913, 1686},

        {"Task100ms", "APedSensorDiag", 66288, {"PedalAngle1", "PedalAngle2"}, {}, 102, 235},
        {"Task100ms", "InjBattVoltCorrSWC", 56928, {"BatteryVoltage"}, {"BatVoltCorr"}, 290, 547},
    };
    return rows;
}

std::string label_id(std::string_view name) { return std::string(name) + "?type=Label"; }
std::string runnable_id(std::string_view name) { return std::string(name) + "?type=Runnable"; }
std::string task_id(std::string_view name) { return std::string(name) + "?type=Task"; }

}  // namespace

AmaltheaModel build_democar(const Options& options)
{
    AmaltheaModel m;

    for (const auto& row : kLabels)
        m.add_label({label_id(row.name), std::string(row.name), row.bits});

    for (const auto& row : runnable_rows()) {
        Runnable r;
        r.id = runnable_id(row.name);
        r.name = row.name;
        r.size_bits = row.size_bits;
        for (auto l : row.reads)
            r.reads.push_back(label_id(l));
        for (auto l : row.writes)
            r.writes.push_back(label_id(l));
        r.bcet_instructions = row.bcet;
        r.wcet_instructions = row.wcet;
        m.add_runnable(std::move(r));
    }

    m.add_stimulus({"Crank?type=InterProcessStimulus",
                    InterProcess{label_id("CylinderNumber"), options.crank_period_us}});
    m.add_stimulus({"CylNumObserved?type=InterProcessStimulus",
                    InterProcess{label_id("TriggeredCylinderNumber"), std::nullopt}});
    m.add_stimulus({"Timer_5MS?type=PeriodicStimulus", Periodic{5'000, 0}});
    m.add_stimulus({"Timer_10MS?type=PeriodicStimulus", Periodic{10'000, 0}});
    m.add_stimulus({"Timer_20MS?type=PeriodicStimulus", Periodic{20'000, 0}});
    m.add_stimulus({"Timer_100MS?type=PeriodicStimulus", Periodic{100'000, 0}});

    struct TaskRow {
        std::string_view name;
        std::uint32_t priority;
        std::string stimulus;
    };
    const TaskRow tasks[] = {
        {"CylNumTriggeredTask", 30, "Crank?type=InterProcessStimulus"},
        {"ActuatorTask", 25, "CylNumObserved?type=InterProcessStimulus"},
        {"Task5ms", 20, "Timer_5MS?type=PeriodicStimulus"},
        {"Task10ms", 15, "Timer_10MS?type=PeriodicStimulus"},
        {"Task20ms", 10, "Timer_20MS?type=PeriodicStimulus"},
        {"Task100ms", 5, "Timer_100MS?type=PeriodicStimulus"},
    };
    for (const auto& row : tasks) {
        Task t;
        t.id = task_id(row.name);
        t.name = row.name;
        t.priority = row.priority;
        t.stimulus = row.stimulus;
        for (const auto& r : runnable_rows())
            if (r.task == row.name)
                t.runnables.push_back(runnable_id(r.name));
        m.add_task(std::move(t));
    }

    install_hardware(m, build_democar_platform(options.mesh_width, options.mesh_height,
                                               options.mesh_width * options.mesh_height,
                                               options.clock));
    return m;
}

MeshCores build_democar_platform(int width, int height, int active, const ClockOptions& clock)
{
    if (width < 1 || height < 1)
        throw std::invalid_argument("mesh dimensions must be positive");
    if (active < 1 || active > width * height)
        throw std::invalid_argument("active core count " + std::to_string(active) +
                                    " must be within 1.." + std::to_string(width * height));
    MeshCores mesh;
    mesh.width = width;
    mesh.height = height;
    mesh.core_types.push_back({"EcuCore?type=CoreType", clock.ticks_per_instruction});
    mesh.quartzes.push_back({"EcuQuartz?type=Quartz", clock.frequency_hz});
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const std::string name = "Core_" + std::to_string(x) + "_" + std::to_string(y);
            mesh.cores.push_back({name + "?type=Core", name, mesh.core_types[0].id,
                                  mesh.quartzes[0].id, Coord{x, y}});
            mesh.active.push_back(static_cast<int>(mesh.active.size()) < active);
        }
    return mesh;
}

void install_hardware(AmaltheaModel& model, const MeshCores& mesh)
{
    for (const auto& ct : mesh.core_types)
        model.add_core_type(ct);
    for (const auto& q : mesh.quartzes)
        model.add_quartz(q);
    for (const auto& c : mesh.cores)
        model.add_core(c);
}

}  // namespace autobench::democar
