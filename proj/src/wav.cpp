#include "affectgan/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace affectgan {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const char* p) {
    std::uint32_t v = 0;
    std::memcpy(&v, p, 4);
    return v;
}

std::uint16_t get_u16(const char* p) {
    std::uint16_t v = 0;
    std::memcpy(&v, p, 2);
    return v;
}

}  // namespace

void write_wav(const AudioTrack& track, const std::filesystem::path& file) {
    if (track.sample_rate <= 0) throw std::invalid_argument("write_wav: bad sample rate");
    const std::uint32_t n = static_cast<std::uint32_t>(track.samples.size());
    const std::uint32_t data_bytes = n * 2;

    std::string out;
    out.reserve(44 + data_bytes);
    out += "RIFF";
    put_u32(out, 36 + data_bytes);
    out += "WAVEfmt ";
    put_u32(out, 16);
    put_u16(out, 1);  // PCM
    put_u16(out, 1);  // mono
    put_u32(out, static_cast<std::uint32_t>(track.sample_rate));
    put_u32(out, static_cast<std::uint32_t>(track.sample_rate) * 2);
    put_u16(out, 2);   // block align
    put_u16(out, 16);  // bits per sample
    out += "data";
    put_u32(out, data_bytes);
    for (double s : track.samples) {
        const double clamped = std::clamp(s, -1.0, 1.0);
        const auto q = static_cast<std::int16_t>(std::lround(clamped * 32767.0));
        put_u16(out, static_cast<std::uint16_t>(q));
    }

    std::ofstream f(file, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open WAV for writing: " + file.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("WAV write failed: " + file.string());
}

AudioTrack read_wav(const std::filesystem::path& file) {
    std::ifstream f(file, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open WAV for reading: " + file.string());
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (bytes.size() < 44 || bytes.compare(0, 4, "RIFF") != 0 || bytes.compare(8, 4, "WAVE") != 0)
        throw std::runtime_error("not a WAV file: " + file.string());

    AudioTrack track;
    std::size_t pos = 12;
    bool have_fmt = false;
    while (pos + 8 <= bytes.size()) {
        const std::string id = bytes.substr(pos, 4);
        const std::uint32_t len = get_u32(bytes.data() + pos + 4);
        pos += 8;
        if (pos + len > bytes.size())
            throw std::runtime_error("truncated WAV chunk: " + file.string());
        if (id == "fmt ") {
            if (len < 16 || get_u16(bytes.data() + pos) != 1 ||
                get_u16(bytes.data() + pos + 2) != 1 || get_u16(bytes.data() + pos + 14) != 16)
                throw std::runtime_error("unsupported WAV format (need mono PCM16): " +
                                         file.string());
            track.sample_rate = static_cast<int>(get_u32(bytes.data() + pos + 4));
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt) throw std::runtime_error("WAV data before fmt: " + file.string());
            const std::size_t n = len / 2;
            track.samples.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const auto q =
                    static_cast<std::int16_t>(get_u16(bytes.data() + pos + 2 * i));
                track.samples[i] = static_cast<double>(q) / 32767.0;
            }
            return track;
        }
        pos += len + (len & 1);
    }
    throw std::runtime_error("WAV has no data chunk: " + file.string());
}

}  // namespace affectgan
