#pragma once

// Mesh network-on-chip with dimension-ordered (XY) routing and a
// contention-free per-flit latency model.

#include "autobench/model.hpp"

#include <optional>
#include <vector>

namespace autobench {

// A set of cores laid out on a width x height grid, with their core types
// and quartzes; `active` runs parallel to `cores`.
struct MeshCores {
    int width = 0;
    int height = 0;
    std::vector<CoreType> core_types;
    std::vector<Quartz> quartzes;
    std::vector<Core> cores;
    std::vector<bool> active;
};

// Takes the hardware section of `model` when its cores tile a width x height
// grid exactly; the first `active` cores in row-major order are active.
// Returns nullopt when the cores do not tile the grid.
std::optional<MeshCores> mesh_from_model(const AmaltheaModel& model, int width, int height,
                                         int active);

struct NocParams {
    Nanos hop_latency_ns = 10;  // per hop, per flit
    std::uint32_t flit_bits = 32;
};

struct Route {
    std::vector<Coord> path;  // source first, destination last
    std::size_t hops() const { return path.empty() ? 0 : path.size() - 1; }
};

class NocError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// X displacement is resolved completely before any Y displacement.
Route xy_route(int width, int height, Coord src, Coord dst);

class NocPlatform {
public:
    // Cores are re-ordered row-major by position. Throws NocError unless the
    // cores tile the grid exactly, at least one is active, every core's type
    // and quartz resolve, and the parameters are positive.
    explicit NocPlatform(MeshCores mesh, NocParams params = {});

    int width() const { return width_; }
    int height() const { return height_; }
    const NocParams& params() const { return params_; }

    std::size_t core_count() const { return cores_.size(); }
    const Core& core(std::size_t index) const { return cores_.at(index); }
    bool is_active(std::size_t index) const { return active_.at(index); }
    // Indices of active cores, row-major.
    const std::vector<std::size_t>& active_cores() const { return active_list_; }

    std::optional<std::size_t> core_at(Coord c) const;
    std::optional<std::size_t> find_core_by_name(const std::string& name) const;

    bool in_bounds(Coord c) const
    {
        return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
    }

    Route xy_route(Coord src, Coord dst) const { return autobench::xy_route(width_, height_, src, dst); }

    // 0 for src == dst, otherwise hops * hop_latency_ns * ceil(bits / flit_bits).
    Nanos message_latency(std::uint64_t bits, Coord src, Coord dst) const;

    Nanos execution_time(const Runnable& r, std::size_t core, Bound bound) const;

private:
    int width_;
    int height_;
    NocParams params_;
    std::vector<Core> cores_;
    std::vector<bool> active_;
    std::vector<std::size_t> active_list_;
    std::vector<CoreType> core_types_;  // parallel to cores_
    std::vector<Quartz> quartzes_;      // parallel to cores_
};

}  // namespace autobench
