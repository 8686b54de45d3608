#include "affectgan/audio_features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>

namespace affectgan {

namespace {

// iterative radix-2 FFT; n must be a power of two
void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void descriptors_for_window(const double* x, int win, int rate, double* out) {
    double energy = 0.0;
    for (int i = 0; i < win; ++i) energy += x[i] * x[i];
    out[0] = energy > 0.0 ? std::max(std::log(energy), kSilentLogEnergy) : kSilentLogEnergy;
    out[1] = std::sqrt(energy / win);

    int crossings = 0;
    for (int i = 0; i + 1 < win; ++i)
        if (x[i] * x[i + 1] < 0.0) ++crossings;
    out[2] = static_cast<double>(crossings) / (win - 1);

    // spectral centroid and 85% roll-off on the zero-padded magnitude spectrum
    std::vector<std::complex<double>> spec(next_pow2(static_cast<std::size_t>(win)));
    for (int i = 0; i < win; ++i) spec[static_cast<std::size_t>(i)] = x[i];
    fft_radix2(spec);
    const std::size_t half = spec.size() / 2;
    const double bin_hz = static_cast<double>(rate) / static_cast<double>(spec.size());
    double mag_sum = 0.0, weighted = 0.0, power_sum = 0.0;
    std::vector<double> power(half + 1);
    for (std::size_t j = 0; j <= half; ++j) {
        const double m = std::abs(spec[j]);
        mag_sum += m;
        weighted += m * bin_hz * static_cast<double>(j);
        power[j] = m * m;
        power_sum += power[j];
    }
    out[3] = mag_sum > 0.0 ? weighted / mag_sum : 0.0;
    if (power_sum > 0.0) {
        double cum = 0.0;
        out[4] = bin_hz * static_cast<double>(half);
        for (std::size_t j = 0; j <= half; ++j) {
            cum += power[j];
            if (cum >= 0.85 * power_sum) {
                out[4] = bin_hz * static_cast<double>(j);
                break;
            }
        }
    } else {
        out[4] = 0.0;
    }

    // F0 by autocorrelation peak within [60, 400] Hz
    out[5] = 0.0;
    const int lag_min = std::max(1, rate / 400);
    const int lag_max = std::min(win - 1, rate / 60);
    if (lag_max > lag_min) {
        double r0 = energy;
        if (r0 > 0.0) {
            int best_lag = 0;
            double best = 0.0;
            std::vector<double> r(static_cast<std::size_t>(lag_max) + 1, 0.0);
            for (int lag = lag_min; lag <= lag_max; ++lag) {
                double acc = 0.0;
                for (int i = 0; i + lag < win; ++i) acc += x[i] * x[i + lag];
                r[static_cast<std::size_t>(lag)] = acc;
                if (acc > best) {
                    best = acc;
                    best_lag = lag;
                }
            }
            if (best_lag > 0 && best / r0 > 0.3) {
                double lag = static_cast<double>(best_lag);
                if (best_lag > lag_min && best_lag < lag_max) {
                    // parabolic refinement around the peak
                    const double rm = r[static_cast<std::size_t>(best_lag) - 1];
                    const double rp = r[static_cast<std::size_t>(best_lag) + 1];
                    const double denom = rm - 2.0 * best + rp;
                    if (std::abs(denom) > 1e-12) lag += 0.5 * (rm - rp) / denom;
                }
                out[5] = static_cast<double>(rate) / lag;
            }
        }
    }
}

}  // namespace

std::int64_t video_frame_boundary(int k, int sample_rate, double fps) {
    return static_cast<std::int64_t>(
        std::floor(static_cast<double>(k) * sample_rate / fps + 1e-9));
}

std::vector<AudioFrame> build_audio_frames(const AudioTrack& track, double fps,
                                           int n_video_frames) {
    if (fps <= 0.0) throw std::invalid_argument("build_audio_frames: fps must be > 0");
    if (n_video_frames < 1)
        throw std::invalid_argument("build_audio_frames: need at least one video frame");
    const auto n_samples = static_cast<std::int64_t>(track.samples.size());
    if (n_samples < video_frame_boundary(1, track.sample_rate, fps))
        throw std::invalid_argument("build_audio_frames: track shorter than one video frame");

    std::vector<AudioFrame> frames;
    frames.reserve(static_cast<std::size_t>(n_video_frames));
    for (int k = 0; k < n_video_frames; ++k) {
        const int lo = std::max(k - 1, 0);
        const int hi = std::min(k + 2, n_video_frames);
        AudioFrame f;
        f.center_video_frame = k;
        f.start_sample =
            std::clamp<std::int64_t>(video_frame_boundary(lo, track.sample_rate, fps), 0,
                                     n_samples);
        f.end_sample =
            std::clamp<std::int64_t>(video_frame_boundary(hi, track.sample_rate, fps), 0,
                                     n_samples);
        f.samples.assign(track.samples.begin() + f.start_sample,
                         track.samples.begin() + f.end_sample);
        frames.push_back(std::move(f));
    }
    return frames;
}

LldMatrix extract_llds(const AudioFrame& frame, int sample_rate, double window_s, double hop_s) {
    const int win = static_cast<int>(std::lround(window_s * sample_rate));
    const int hop = static_cast<int>(std::lround(hop_s * sample_rate));
    const int len = static_cast<int>(frame.samples.size());
    if (win < 2 || hop < 1) throw std::invalid_argument("extract_llds: window too small");
    if (len < win)
        throw std::invalid_argument("extract_llds: frame " +
                                    std::to_string(frame.center_video_frame) +
                                    " shorter than one window");
    LldMatrix m;
    m.n_windows = (len - win) / hop + 1;
    m.n_descriptors = kFallbackDescriptors;
    m.values.resize(static_cast<std::size_t>(m.n_windows) * kFallbackDescriptors);
    for (int w = 0; w < m.n_windows; ++w)
        descriptors_for_window(frame.samples.data() + static_cast<std::size_t>(w) * hop, win,
                               sample_rate,
                               m.values.data() + static_cast<std::size_t>(w) * kFallbackDescriptors);
    return m;
}

LldVector select_first_two(const LldMatrix& llds) {
    if (llds.n_windows < 2)
        throw std::invalid_argument("select_first_two: need at least two LLD windows, have " +
                                    std::to_string(llds.n_windows));
    LldVector v;
    v.descriptors_per_window = llds.n_descriptors;
    v.values.assign(llds.values.begin(),
                    llds.values.begin() + 2 * static_cast<std::size_t>(llds.n_descriptors));
    return v;
}

std::vector<LldVector> fallback_clip_llds(const AudioTrack& track, double fps,
                                          int n_video_frames) {
    const auto frames = build_audio_frames(track, fps, n_video_frames);
    std::vector<LldVector> out;
    out.reserve(frames.size());
    for (const auto& f : frames) out.push_back(select_first_two(extract_llds(f, track.sample_rate)));
    return out;
}

namespace {

std::vector<std::string> split_cells(const std::string& line, char delim) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delim, start);
        if (pos == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cells;
}

double parse_cell(const std::string& cell, int row_number) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{})
        throw std::runtime_error("ingest_precomputed: non-numeric cell \"" + cell + "\" at row " +
                                 std::to_string(row_number));
    return v;
}

}  // namespace

std::vector<LldVector> ingest_precomputed(const std::filesystem::path& csv_file, double fps,
                                          int n_video_frames) {
    std::ifstream in(csv_file);
    if (!in) throw std::runtime_error("cannot open LLD CSV: " + csv_file.string());
    std::string header;
    if (!std::getline(in, header))
        throw std::runtime_error("ingest_precomputed: empty file " + csv_file.string());
    if (!header.empty() && header.back() == '\r') header.pop_back();
    const char delim = header.find(';') != std::string::npos ? ';' : ',';
    const int n_cols = static_cast<int>(split_cells(header, delim).size());
    if (n_cols < 2)
        throw std::runtime_error("ingest_precomputed: need a timestamp and at least one descriptor");
    const int d = n_cols - 1;

    std::vector<double> timestamps;
    std::vector<std::vector<double>> rows;
    std::string line;
    int row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_cells(line, delim);
        if (static_cast<int>(cells.size()) != n_cols)
            throw std::runtime_error("ingest_precomputed: row " + std::to_string(row_number) +
                                     " has " + std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(n_cols));
        timestamps.push_back(parse_cell(cells[0], row_number));
        std::vector<double> vals(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j)
            vals[static_cast<std::size_t>(j)] = parse_cell(cells[static_cast<std::size_t>(j) + 1],
                                                           row_number);
        rows.push_back(std::move(vals));
    }

    std::vector<LldVector> out;
    out.reserve(static_cast<std::size_t>(n_video_frames));
    for (int k = 0; k < n_video_frames; ++k) {
        const double t0 = static_cast<double>(std::max(k - 1, 0)) / fps;
        const double t1 = static_cast<double>(std::min(k + 2, n_video_frames)) / fps;
        LldVector v;
        v.descriptors_per_window = d;
        int found = 0;
        for (std::size_t i = 0; i < timestamps.size() && found < 2; ++i) {
            if (timestamps[i] >= t0 - 1e-9 && timestamps[i] < t1 - 1e-9) {
                v.values.insert(v.values.end(), rows[i].begin(), rows[i].end());
                ++found;
            }
        }
        if (found < 2)
            throw std::runtime_error("ingest_precomputed: video frame " + std::to_string(k) +
                                     " has fewer than 2 LLD windows in " + csv_file.string());
        out.push_back(std::move(v));
    }
    return out;
}

void write_lld_csv(const std::vector<LldVector>& vectors, const std::filesystem::path& file) {
    if (vectors.empty()) throw std::invalid_argument("write_lld_csv: no vectors");
    std::ofstream f(file);
    if (!f) throw std::runtime_error("cannot write LLD file: " + file.string());
    const int len = vectors.front().length();
    f << "frame";
    for (int j = 0; j < len; ++j) f << ",d" << j;
    f << "\n";
    char buf[40];
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].length() != len)
            throw std::invalid_argument("write_lld_csv: mixed vector lengths");
        f << i;
        for (double v : vectors[i].values) {
            std::snprintf(buf, sizeof(buf), "%.12g", v);
            f << "," << buf;
        }
        f << "\n";
    }
}

std::vector<LldVector> read_lld_csv(const std::filesystem::path& file) {
    std::ifstream f(file);
    if (!f) throw std::runtime_error("cannot read LLD file: " + file.string());
    std::string header;
    if (!std::getline(f, header) || header.rfind("frame,", 0) != 0)
        throw std::runtime_error("bad LLD file header in " + file.string());
    const int len = static_cast<int>(split_cells(header, ',').size()) - 1;
    std::vector<LldVector> out;
    std::string line;
    int row_number = 1;
    while (std::getline(f, line)) {
        ++row_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_cells(line, ',');
        if (static_cast<int>(cells.size()) != len + 1)
            throw std::runtime_error("bad LLD row " + std::to_string(row_number) + " in " +
                                     file.string());
        LldVector v;
        v.descriptors_per_window = len / 2;
        v.values.reserve(static_cast<std::size_t>(len));
        for (int j = 0; j < len; ++j)
            v.values.push_back(parse_cell(cells[static_cast<std::size_t>(j) + 1], row_number));
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace affectgan
