#include "autobench/noc.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>

namespace autobench {

namespace {

std::string str(Coord c)
{
    return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")";
}

bool row_major_less(const Core& a, const Core& b)
{
    return a.position.y != b.position.y ? a.position.y < b.position.y : a.position.x < b.position.x;
}

}  // namespace

std::optional<MeshCores> mesh_from_model(const AmaltheaModel& model, int width, int height,
                                         int active)
{
    if (width < 1 || height < 1)
        return std::nullopt;
    if (model.core_count() != static_cast<std::size_t>(width) * height)
        return std::nullopt;
    for (const auto& c : model.cores())
        if (c.position.x < 0 || c.position.y < 0 || c.position.x >= width || c.position.y >= height)
            return std::nullopt;

    MeshCores mesh;
    mesh.width = width;
    mesh.height = height;
    mesh.core_types = model.core_types();
    mesh.quartzes = model.quartzes();
    mesh.cores = model.cores();
    std::stable_sort(mesh.cores.begin(), mesh.cores.end(), row_major_less);
    for (std::size_t i = 0; i < mesh.cores.size(); ++i)
        mesh.active.push_back(static_cast<int>(i) < active);
    return mesh;
}

Route xy_route(int width, int height, Coord src, Coord dst)
{
    auto in = [&](Coord c) { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; };
    if (!in(src) || !in(dst))
        throw NocError("route " + str(src) + " -> " + str(dst) + " leaves the " +
                       std::to_string(width) + "x" + std::to_string(height) + " mesh");
    Route r;
    Coord at = src;
    r.path.push_back(at);
    while (at.x != dst.x) {
        at.x += dst.x > at.x ? 1 : -1;
        r.path.push_back(at);
    }
    while (at.y != dst.y) {
        at.y += dst.y > at.y ? 1 : -1;
        r.path.push_back(at);
    }
    return r;
}

NocPlatform::NocPlatform(MeshCores mesh, NocParams params)
    : width_(mesh.width), height_(mesh.height), params_(params)
{
    if (width_ < 1 || height_ < 1)
        throw NocError("mesh dimensions must be positive");
    if (params_.hop_latency_ns < 1 || params_.flit_bits < 1)
        throw NocError("hop latency and flit width must be positive");
    if (mesh.cores.size() != static_cast<std::size_t>(width_) * height_)
        throw NocError("a " + std::to_string(width_) + "x" + std::to_string(height_) +
                       " mesh needs " + std::to_string(width_ * height_) + " cores, got " +
                       std::to_string(mesh.cores.size()));
    if (mesh.active.size() != mesh.cores.size())
        throw NocError("active mask does not match the core list");

    std::vector<std::size_t> order(mesh.cores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return row_major_less(mesh.cores[a], mesh.cores[b]);
    });

    for (std::size_t k = 0; k < order.size(); ++k) {
        const Core& c = mesh.cores[order[k]];
        const Coord expect{static_cast<int>(k) % width_, static_cast<int>(k) / width_};
        if (!(c.position == expect))
            throw NocError("cores do not tile the mesh: expected a core at " + str(expect));
        auto ct = std::find_if(mesh.core_types.begin(), mesh.core_types.end(),
                               [&](const CoreType& t) { return t.id == c.core_type; });
        auto q = std::find_if(mesh.quartzes.begin(), mesh.quartzes.end(),
                              [&](const Quartz& x) { return x.id == c.quartz; });
        if (ct == mesh.core_types.end() || q == mesh.quartzes.end())
            throw NocError("core '" + c.id + "' has an unresolved core type or quartz");
        cores_.push_back(c);
        core_types_.push_back(*ct);
        quartzes_.push_back(*q);
        active_.push_back(mesh.active[order[k]]);
        if (active_.back())
            active_list_.push_back(k);
    }
    if (active_list_.empty())
        throw NocError("at least one core must be active");
}

std::optional<std::size_t> NocPlatform::core_at(Coord c) const
{
    if (!in_bounds(c))
        return std::nullopt;
    return static_cast<std::size_t>(c.y) * width_ + c.x;
}

std::optional<std::size_t> NocPlatform::find_core_by_name(const std::string& name) const
{
    for (std::size_t i = 0; i < cores_.size(); ++i)
        if (cores_[i].name == name)
            return i;
    return std::nullopt;
}

Nanos NocPlatform::message_latency(std::uint64_t bits, Coord src, Coord dst) const
{
    if (!in_bounds(src) || !in_bounds(dst))
        throw NocError("message endpoint " + str(in_bounds(src) ? dst : src) + " is outside the mesh");
    const Nanos hops = std::abs(src.x - dst.x) + std::abs(src.y - dst.y);
    if (hops == 0)
        return 0;
    const Nanos flits = static_cast<Nanos>((bits + params_.flit_bits - 1) / params_.flit_bits);
    return hops * params_.hop_latency_ns * flits;
}

Nanos NocPlatform::execution_time(const Runnable& r, std::size_t core, Bound bound) const
{
    return autobench::execution_time(r, core_types_.at(core), quartzes_.at(core), bound);
}

}  // namespace autobench
