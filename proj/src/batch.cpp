#include "affectgan/batch.hpp"

#include <algorithm>
#include <stdexcept>

namespace affectgan {

FrameDataset::FrameDataset(const DatasetManifest& manifest, const std::string& split) {
    const auto entries = manifest.clips_in_split(split);
    if (entries.empty())
        throw std::invalid_argument("split \"" + split + "\" is empty");
    for (const auto& entry : entries) {
        ClipRecord clip = load_clip(manifest, entry);
        // a precomputed per-clip LLD file (written by `features`) wins over
        // the fallback extractor
        const auto lld_file =
            (manifest.root / entry.label_file).parent_path() / "lld.csv";
        const auto llds =
            std::filesystem::exists(lld_file)
                ? read_lld_csv(lld_file)
                : fallback_clip_llds(clip.audio, clip.fps,
                                     static_cast<int>(clip.frames.size()));
        if (llds.size() != clip.frames.size())
            throw ManifestError(entry.clip_id, "LLD row count does not match frame count");
        for (std::size_t i = 0; i < clip.frames.size(); ++i) {
            const Image& img = clip.frames[i];
            if (image_size_ == 0) image_size_ = img.height;
            if (img.height != image_size_ || img.width != image_size_)
                throw ManifestError(entry.clip_id, "frame size differs from the rest of the split");
            if (lld_length_ == 0) lld_length_ = llds[i].length();
            if (llds[i].length() != lld_length_)
                throw ManifestError(entry.clip_id, "LLD vector length differs across clips");
            frames_.push_back(std::move(clip.frames[i]));
            llds_.push_back(llds[i]);
            labels_.push_back(clip.labels[i]);
        }
    }
}

std::vector<double> FrameDataset::labels_of(AffectDim dim) const {
    std::vector<double> out;
    out.reserve(labels_.size());
    for (const auto& l : labels_)
        out.push_back(dim == AffectDim::valence ? l.valence : l.arousal);
    return out;
}

BatchIterator::BatchIterator(const FrameDataset& dataset, const BatchConfig& config)
    : dataset_(dataset), config_(config) {
    if (config_.batch_size < 2)
        throw std::invalid_argument("batch_size must be >= 2 (correlation losses need pairs)");
    config_.noise.validate();
    order_.resize(dataset_.n_frames());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
}

void BatchIterator::start_epoch(int epoch) {
    epoch_ = epoch;
    cursor_ = 0;
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    Rng rng(mix_seed(config_.seed, static_cast<std::uint64_t>(epoch) ^ 0x0E0C0ULL));
    rng.shuffle(order_);
}

int BatchIterator::batches_per_epoch() const {
    const auto n = dataset_.n_frames();
    const auto b = static_cast<std::size_t>(config_.batch_size);
    return static_cast<int>((n + b - 1) / b);
}

bool BatchIterator::next(Batch& out) {
    if (cursor_ >= order_.size()) return false;
    const std::size_t take =
        std::min(static_cast<std::size_t>(config_.batch_size), order_.size() - cursor_);
    const int s = dataset_.image_size();
    const int b = static_cast<int>(take);
    out.noisy = Tensor({b, 3, s, s});
    out.clean = Tensor({b, 3, s, s});
    out.lld = Tensor({b, dataset_.lld_length()});
    out.labels = Tensor({b, 2});

    const std::size_t plane = static_cast<std::size_t>(3) * s * s;
    for (std::size_t j = 0; j < take; ++j) {
        const std::size_t idx = order_[cursor_ + j];
        const Image& clean = dataset_.frame(idx);
        const Image noisy =
            corrupt(clean, config_.noise, frame_corruption_seed(config_.seed, epoch_, idx));
        std::copy(clean.data.begin(), clean.data.end(), out.clean.data() + j * plane);
        std::copy(noisy.data.begin(), noisy.data.end(), out.noisy.data() + j * plane);
        const auto& lld = dataset_.lld(idx);
        std::copy(lld.values.begin(), lld.values.end(),
                  out.lld.data() + j * static_cast<std::size_t>(dataset_.lld_length()));
        out.labels[j * 2] = dataset_.label(idx).valence;
        out.labels[j * 2 + 1] = dataset_.label(idx).arousal;
    }
    cursor_ += take;
    return true;
}

Image eval_corrupted_frame(const FrameDataset& dataset, std::size_t index,
                           const NoiseSpec& noise, std::uint64_t seed) {
    return corrupt(dataset.frame(index), noise, frame_corruption_seed(seed, -1, index));
}

}  // namespace affectgan
