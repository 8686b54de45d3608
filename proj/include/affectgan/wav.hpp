#pragma once

#include <filesystem>
#include <vector>

namespace affectgan {

struct AudioTrack {
    std::vector<double> samples;  // mono, in [-1, 1]
    int sample_rate = 16000;

    double duration_s() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
};

// 16-bit PCM mono WAV
void write_wav(const AudioTrack& track, const std::filesystem::path& file);
AudioTrack read_wav(const std::filesystem::path& file);

}  // namespace affectgan
