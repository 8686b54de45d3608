#include "affectgan/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace affectgan {

namespace {

constexpr char kMagic[8] = {'A', 'F', 'G', 'N', 'C', 'K', 'P', '1'};

nlohmann::json spec_to_json(const AegSpec& s) {
    return {{"image_size", s.image_size},
            {"in_channels", s.in_channels},
            {"encoder_channels", s.encoder_channels}};
}

AegSpec aeg_spec_from_json(const nlohmann::json& j) {
    AegSpec s;
    s.image_size = j.at("image_size").get<int>();
    s.in_channels = j.at("in_channels").get<int>();
    s.encoder_channels = j.at("encoder_channels").get<std::vector<int>>();
    return s;
}

nlohmann::json spec_to_json(const CdSpec& s) {
    return {{"image_size", s.image_size},
            {"image_channels", s.image_channels},
            {"append_noisy", s.append_noisy},
            {"trunk_channels", s.trunk_channels},
            {"latent_channels", s.latent_channels},
            {"head_channels", s.head_channels},
            {"lld_length", s.lld_length}};
}

CdSpec cd_spec_from_json(const nlohmann::json& j) {
    CdSpec s;
    s.image_size = j.at("image_size").get<int>();
    s.image_channels = j.at("image_channels").get<int>();
    s.append_noisy = j.at("append_noisy").get<bool>();
    s.trunk_channels = j.at("trunk_channels").get<std::vector<int>>();
    s.latent_channels = j.at("latent_channels").get<int>();
    s.head_channels = j.at("head_channels").get<std::vector<int>>();
    s.lld_length = j.at("lld_length").get<int>();
    return s;
}

void append_tensor_meta(nlohmann::json& list, const std::vector<Param*>& params) {
    for (const Param* p : params)
        list.push_back({{"name", p->name}, {"shape", p->value.shape()}});
}

}  // namespace

void save_checkpoint(const std::filesystem::path& file, const std::string& mode_label, Aeg* aeg,
                     Cd& cd, const std::string& extra_json) {
    nlohmann::json header;
    header["mode"] = mode_label;
    header["extra"] = nlohmann::json::parse(extra_json);
    header["has_aeg"] = aeg != nullptr;
    if (aeg) header["aeg_spec"] = spec_to_json(aeg->spec());
    header["cd_spec"] = spec_to_json(cd.spec());
    nlohmann::json tensors = nlohmann::json::array();
    if (aeg) append_tensor_meta(tensors, aeg->params());
    append_tensor_meta(tensors, cd.params());
    header["tensors"] = tensors;

    const std::string hs = header.dump();
    std::ofstream f(file, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write checkpoint: " + file.string());
    f.write(kMagic, sizeof(kMagic));
    const std::uint64_t len = hs.size();
    f.write(reinterpret_cast<const char*>(&len), sizeof(len));
    f.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    auto dump_params = [&](const std::vector<Param*>& params) {
        for (const Param* p : params)
            f.write(reinterpret_cast<const char*>(p->value.data()),
                    static_cast<std::streamsize>(p->value.size() * sizeof(double)));
    };
    if (aeg) dump_params(aeg->params());
    dump_params(cd.params());
    if (!f) throw std::runtime_error("checkpoint write failed: " + file.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& file) {
    std::ifstream f(file, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read checkpoint: " + file.string());
    char magic[8];
    f.read(magic, sizeof(magic));
    if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a checkpoint file: " + file.string());
    std::uint64_t len = 0;
    f.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string hs(len, '\0');
    f.read(hs.data(), static_cast<std::streamsize>(len));
    if (!f) throw std::runtime_error("truncated checkpoint header: " + file.string());
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(hs);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("bad checkpoint header in " + file.string() + ": " + e.what());
    }

    LoadedCheckpoint out;
    out.mode_label = header.at("mode").get<std::string>();
    out.extra_json = header.value("extra", nlohmann::json::object()).dump();
    if (header.at("has_aeg").get<bool>())
        out.aeg = std::make_unique<Aeg>(aeg_spec_from_json(header.at("aeg_spec")), 0);
    out.cd = std::make_unique<Cd>(cd_spec_from_json(header.at("cd_spec")), 0);

    std::vector<Param*> params;
    if (out.aeg) params = out.aeg->params();
    const auto cd_params = out.cd->params();
    params.insert(params.end(), cd_params.begin(), cd_params.end());

    const auto& tensors = header.at("tensors");
    if (tensors.size() != params.size())
        throw std::runtime_error("checkpoint tensor count mismatch in " + file.string());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& meta = tensors[i];
        const auto name = meta.at("name").get<std::string>();
        const auto shape = meta.at("shape").get<std::vector<int>>();
        if (name != params[i]->name || shape != params[i]->value.shape())
            throw std::runtime_error("checkpoint tensor \"" + name +
                                     "\" does not match the spec-built model in " + file.string());
        f.read(reinterpret_cast<char*>(params[i]->value.data()),
               static_cast<std::streamsize>(params[i]->value.size() * sizeof(double)));
        if (!f) throw std::runtime_error("truncated checkpoint data: " + file.string());
    }
    return out;
}

std::uint64_t checkpoint_checksum(const std::filesystem::path& file) {
    LoadedCheckpoint ckpt = load_checkpoint(file);
    std::vector<Param*> params;
    if (ckpt.aeg) params = ckpt.aeg->params();
    const auto cd_params = ckpt.cd->params();
    params.insert(params.end(), cd_params.begin(), cd_params.end());
    return params_checksum(params);
}

}  // namespace affectgan
