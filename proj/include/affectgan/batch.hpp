#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "affectgan/audio_features.hpp"
#include "affectgan/manifest.hpp"
#include "affectgan/metrics.hpp"
#include "affectgan/noise.hpp"
#include "affectgan/rng.hpp"
#include "affectgan/tensor.hpp"

namespace affectgan {

struct Batch {
    Tensor noisy;   // [B,3,H,W]
    Tensor clean;   // [B,3,H,W]
    Tensor lld;     // [B,L]
    Tensor labels;  // [B,2] (valence, arousal)

    int size() const { return noisy.empty() ? 0 : noisy.dim(0); }
};

// Per-frame corruption seed; epoch -1 is reserved for evaluation passes.
inline std::uint64_t frame_corruption_seed(std::uint64_t seed, int epoch,
                                           std::size_t frame_index) {
    return mix_seed(mix_seed(seed, static_cast<std::uint64_t>(epoch) ^ 0xB10C0EB5ULL),
                    static_cast<std::uint64_t>(frame_index));
}

// One split resident in memory: frames, labels, and per-frame LLD vectors
// from the fallback extractor. LLD length must agree across clips.
class FrameDataset {
public:
    FrameDataset(const DatasetManifest& manifest, const std::string& split);

    std::size_t n_frames() const { return frames_.size(); }
    int image_size() const { return image_size_; }
    int lld_length() const { return lld_length_; }

    const Image& frame(std::size_t i) const { return frames_[i]; }
    const LldVector& lld(std::size_t i) const { return llds_[i]; }
    const AffectEstimate& label(std::size_t i) const { return labels_[i]; }

    std::vector<double> labels_of(AffectDim dim) const;

private:
    std::vector<Image> frames_;
    std::vector<LldVector> llds_;
    std::vector<AffectEstimate> labels_;
    int image_size_ = 0;
    int lld_length_ = 0;
};

struct BatchConfig {
    int batch_size = 16;
    NoiseSpec noise;
    std::uint64_t seed = 1;
};

// Deterministic shuffled batches over a split; the final short batch is
// emitted. Pairs every clean frame with corrupt(clean, noise,
// frame_corruption_seed(seed, epoch, frame_index)).
class BatchIterator {
public:
    BatchIterator(const FrameDataset& dataset, const BatchConfig& config);

    void start_epoch(int epoch);
    bool next(Batch& out);

    int batches_per_epoch() const;

private:
    const FrameDataset& dataset_;
    BatchConfig config_;
    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
    int epoch_ = 0;
};

// Deterministic corrupted view of one frame for evaluation (epoch -1 stream).
Image eval_corrupted_frame(const FrameDataset& dataset, std::size_t index,
                           const NoiseSpec& noise, std::uint64_t seed);

}  // namespace affectgan
