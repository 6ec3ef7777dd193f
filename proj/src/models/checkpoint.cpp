#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "venomguard/models/models.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vg::models {

void save_checkpoint(const ModelHandle& m, const std::string& path) {
    const std::string blob = path + ".bin";
    json j{{"role", to_string(m.role)},
           {"arch", {{"name", to_string(m.arch.name)}, {"conditioning", to_string(m.arch.conditioning)}}},
           {"seed", m.seed},
           {"param_count", m.param_count()},
           {"train_step", m.train_step},
           {"options",
            {{"resolution", m.opts.resolution},
             {"attr_count", m.opts.attr_count},
             {"in_channels", m.opts.in_channels},
             {"out_channels", m.opts.out_channels},
             {"base_width", m.opts.base_width},
             {"critic_width", m.opts.critic_width}}},
           {"blob", fs::path(blob).filename().string()}};

    std::ofstream out(path);
    if (!out) throw IoError("save_checkpoint: cannot write " + path);
    out << j.dump(2) << "\n";

    std::vector<double> flat = m.flat_parameters();
    std::vector<float> f32(flat.begin(), flat.end());
    std::ofstream bout(blob, std::ios::binary);
    if (!bout) throw IoError("save_checkpoint: cannot write " + blob);
    bout.write(reinterpret_cast<const char*>(f32.data()),
               static_cast<std::streamsize>(f32.size() * sizeof(float)));
    if (!bout) throw IoError("save_checkpoint: short write to " + blob);
}

ModelHandle load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_checkpoint: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError(std::string("load_checkpoint: parse error: ") + e.what());
    }

    ArchitectureTag tag;
    tag.name = arch_from_string(j.at("arch").at("name").get<std::string>());
    tag.conditioning = conditioning_from_string(j.at("arch").at("conditioning").get<std::string>());
    const Role role = role_from_string(j.at("role").get<std::string>());

    BuildOptions opts;
    const auto& jo = j.at("options");
    opts.resolution = jo.at("resolution").get<int>();
    opts.attr_count = jo.at("attr_count").get<int>();
    opts.in_channels = jo.at("in_channels").get<int>();
    opts.out_channels = jo.at("out_channels").get<int>();
    opts.base_width = jo.at("base_width").get<int>();
    opts.critic_width = jo.at("critic_width").get<int>();

    ModelHandle m = build(tag, role, j.at("seed").get<std::uint64_t>(), opts);
    m.train_step = j.at("train_step").get<std::int64_t>();

    const std::size_t count = j.at("param_count").get<std::size_t>();
    if (count != m.param_count())
        throw IoError("load_checkpoint: parameter count mismatch in " + path);

    const fs::path blob = fs::path(path).parent_path() / j.at("blob").get<std::string>();
    std::ifstream bin(blob, std::ios::binary);
    if (!bin) throw IoError("load_checkpoint: cannot open blob " + blob.string());
    std::vector<float> f32(count);
    bin.read(reinterpret_cast<char*>(f32.data()),
             static_cast<std::streamsize>(count * sizeof(float)));
    if (bin.gcount() != static_cast<std::streamsize>(count * sizeof(float)))
        throw IoError("load_checkpoint: truncated blob " + blob.string());

    m.load_flat_parameters(std::vector<double>(f32.begin(), f32.end()));
    return m;
}

}  // namespace vg::models
