#include "affectgan/runconfig.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace affectgan {

AegSpec ModelConfig::aeg_spec() const {
    AegSpec s;
    s.image_size = image_size;
    s.encoder_channels = aeg_channels;
    return s;
}

CdSpec ModelConfig::cd_spec() const {
    CdSpec s;
    s.image_size = image_size;
    s.trunk_channels = cd_trunk_channels;
    s.head_channels = cd_head_channels;
    s.append_noisy = append_noisy;
    s.latent_channels = aeg_channels.back();
    return s;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    std::size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad number for " + key + ": \"" + v + "\"");
    }
}

long long parse_int(const std::string& key, const std::string& v) {
    long long x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw std::invalid_argument("config: bad integer for " + key + ": \"" + v + "\"");
    return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw std::invalid_argument("config: bad boolean for " + key + ": \"" + v + "\"");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    if (trim(v).empty()) return out;
    std::stringstream ss(v);
    std::string cell;
    while (std::getline(ss, cell, ','))
        out.push_back(static_cast<int>(parse_int(key, trim(cell))));
    return out;
}

std::string join_int_list(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

RunConfig parse_run_config_text(const std::string& text, const std::filesystem::path& base_dir) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": malformed section header");
            section = line.substr(1, line.size() - 2);
            if (section != "data" && section != "model" && section != "train" &&
                section != "eval")
                throw std::invalid_argument("config: unknown section [" + section + "]");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string qual = section + "." + key;

        if (section == "data") {
            auto& d = cfg.data;
            if (key == "manifest")
                d.manifest = (base_dir / value).lexically_normal().string();
            else if (key == "train_split") d.train_split = value;
            else if (key == "val_split") d.val_split = value;
            else if (key == "blur_sigma_lo") d.noise.blur_sigma_lo = parse_real(qual, value);
            else if (key == "blur_sigma_hi") d.noise.blur_sigma_hi = parse_real(qual, value);
            else if (key == "noise_sigma_lo") d.noise.noise_sigma_lo = parse_real(qual, value);
            else if (key == "noise_sigma_hi") d.noise.noise_sigma_hi = parse_real(qual, value);
            else if (key == "downsample_factors")
                d.noise.downsample_factors = parse_int_list(qual, value);
            else if (key == "color_scale_lo") d.noise.color_scale_lo = parse_real(qual, value);
            else if (key == "color_scale_hi") d.noise.color_scale_hi = parse_real(qual, value);
            else if (key == "p_blur") d.noise.p_blur = parse_real(qual, value);
            else if (key == "p_downsample") d.noise.p_downsample = parse_real(qual, value);
            else if (key == "p_noise") d.noise.p_noise = parse_real(qual, value);
            else if (key == "p_color") d.noise.p_color = parse_real(qual, value);
            else throw std::invalid_argument("config: unknown key " + qual);
        } else if (section == "model") {
            auto& m = cfg.model;
            if (key == "image_size") m.image_size = static_cast<int>(parse_int(qual, value));
            else if (key == "aeg_channels") m.aeg_channels = parse_int_list(qual, value);
            else if (key == "cd_trunk_channels")
                m.cd_trunk_channels = parse_int_list(qual, value);
            else if (key == "cd_head_channels") m.cd_head_channels = parse_int_list(qual, value);
            else if (key == "append_noisy") m.append_noisy = parse_bool(qual, value);
            else throw std::invalid_argument("config: unknown key " + qual);
        } else if (section == "train") {
            auto& t = cfg.train;
            if (key == "mode") t.mode = train_mode_from_string(value);
            else if (key == "lambda_afc") t.lambda_afc = parse_real(qual, value);
            else if (key == "lambda_rec") t.lambda_rec = parse_real(qual, value);
            else if (key == "adv_loss") t.adv_loss = adv_loss_kind_from_string(value);
            else if (key == "g_lr") t.g_lr = parse_real(qual, value);
            else if (key == "d_lr") t.d_lr = parse_real(qual, value);
            else if (key == "d_steps_per_g")
                t.d_steps_per_g = static_cast<int>(parse_int(qual, value));
            else if (key == "batch_size") t.batch_size = static_cast<int>(parse_int(qual, value));
            else if (key == "epochs") t.epochs = static_cast<int>(parse_int(qual, value));
            else if (key == "seed") t.seed = static_cast<std::uint64_t>(parse_int(qual, value));
            else if (key == "weighting") t.weighting = weight_mode_from_string(value);
            else if (key == "n_bins") t.n_bins = static_cast<int>(parse_int(qual, value));
            else if (key == "disc_full_affect_loss")
                t.disc_full_affect_loss = parse_bool(qual, value);
            else if (key == "eval_on_clean") t.eval_on_clean = parse_bool(qual, value);
            else throw std::invalid_argument("config: unknown key " + qual);
        } else if (section == "eval") {
            auto& e = cfg.eval;
            if (key == "split") e.split = value;
            else if (key == "batch_size") e.batch_size = static_cast<int>(parse_int(qual, value));
            else throw std::invalid_argument("config: unknown key " + qual);
        } else {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": key outside any section");
        }
    }
    return cfg;
}

RunConfig parse_run_config(const std::filesystem::path& file) {
    std::ifstream f(file);
    if (!f) throw std::runtime_error("cannot read config: " + file.string());
    std::stringstream ss;
    ss << f.rdbuf();
    const auto base =
        file.has_parent_path() ? file.parent_path() : std::filesystem::path(".");
    return parse_run_config_text(ss.str(), base);
}

std::string dump_run_config(const RunConfig& c) {
    std::string out;
    out += "[data]\n";
    out += "manifest = " + c.data.manifest + "\n";
    out += "train_split = " + c.data.train_split + "\n";
    out += "val_split = " + c.data.val_split + "\n";
    out += "blur_sigma_lo = " + format_real(c.data.noise.blur_sigma_lo) + "\n";
    out += "blur_sigma_hi = " + format_real(c.data.noise.blur_sigma_hi) + "\n";
    out += "noise_sigma_lo = " + format_real(c.data.noise.noise_sigma_lo) + "\n";
    out += "noise_sigma_hi = " + format_real(c.data.noise.noise_sigma_hi) + "\n";
    out += "downsample_factors = " + join_int_list(c.data.noise.downsample_factors) + "\n";
    out += "color_scale_lo = " + format_real(c.data.noise.color_scale_lo) + "\n";
    out += "color_scale_hi = " + format_real(c.data.noise.color_scale_hi) + "\n";
    out += "p_blur = " + format_real(c.data.noise.p_blur) + "\n";
    out += "p_downsample = " + format_real(c.data.noise.p_downsample) + "\n";
    out += "p_noise = " + format_real(c.data.noise.p_noise) + "\n";
    out += "p_color = " + format_real(c.data.noise.p_color) + "\n";
    out += "\n[model]\n";
    out += "image_size = " + std::to_string(c.model.image_size) + "\n";
    out += "aeg_channels = " + join_int_list(c.model.aeg_channels) + "\n";
    out += "cd_trunk_channels = " + join_int_list(c.model.cd_trunk_channels) + "\n";
    out += "cd_head_channels = " + join_int_list(c.model.cd_head_channels) + "\n";
    out += std::string("append_noisy = ") + (c.model.append_noisy ? "true" : "false") + "\n";
    out += "\n[train]\n";
    out += std::string("mode = ") + to_string(c.train.mode) + "\n";
    out += "lambda_afc = " + format_real(c.train.lambda_afc) + "\n";
    out += "lambda_rec = " + format_real(c.train.lambda_rec) + "\n";
    out += std::string("adv_loss = ") + to_string(c.train.adv_loss) + "\n";
    out += "g_lr = " + format_real(c.train.g_lr) + "\n";
    out += "d_lr = " + format_real(c.train.d_lr) + "\n";
    out += "d_steps_per_g = " + std::to_string(c.train.d_steps_per_g) + "\n";
    out += "batch_size = " + std::to_string(c.train.batch_size) + "\n";
    out += "epochs = " + std::to_string(c.train.epochs) + "\n";
    out += "seed = " + std::to_string(c.train.seed) + "\n";
    out += std::string("weighting = ") + to_string(c.train.weighting) + "\n";
    out += "n_bins = " + std::to_string(c.train.n_bins) + "\n";
    out += std::string("disc_full_affect_loss = ") +
           (c.train.disc_full_affect_loss ? "true" : "false") + "\n";
    out += std::string("eval_on_clean = ") + (c.train.eval_on_clean ? "true" : "false") + "\n";
    out += "\n[eval]\n";
    out += "split = " + c.eval.split + "\n";
    out += "batch_size = " + std::to_string(c.eval.batch_size) + "\n";
    return out;
}

}  // namespace affectgan
