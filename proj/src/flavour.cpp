#include "audvault/flavour.hpp"

#include "audvault/digest.hpp"
#include "audvault/error.hpp"
#include "audvault/tempdir.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace audvault {

namespace fs = std::filesystem;

void validate_flavour(const Flavour& f) {
    if (f.format != "wav") fail(ErrorCode::InvalidArgument, "unsupported flavour format '" + f.format + "'");
    if (f.bit_depth && *f.bit_depth != 16 && *f.bit_depth != 24 && *f.bit_depth != 32) {
        fail(ErrorCode::InvalidArgument, "flavour bit depth must be 16, 24 or 32");
    }
    if (f.sampling_rate && *f.sampling_rate <= 0) fail(ErrorCode::InvalidArgument, "flavour sampling rate must be positive");
    if (f.channels && f.mixdown) fail(ErrorCode::InvalidArgument, "channel selection and mixdown are mutually exclusive");
    if (f.channels) {
        if (f.channels->empty()) fail(ErrorCode::InvalidArgument, "channel selection must not be empty");
        for (int c : *f.channels) {
            if (c < 0) fail(ErrorCode::InvalidArgument, "channel indices must be non-negative");
        }
    }
}

std::string flavour_id(const Flavour& f) {
    validate_flavour(f);
    if (f.is_raw()) return "raw";
    std::string canon = "bit_depth=" + (f.bit_depth ? std::to_string(*f.bit_depth) : "") + ";channels=";
    if (f.channels) {
        for (std::size_t i = 0; i < f.channels->size(); ++i) {
            if (i) canon += ',';
            canon += std::to_string((*f.channels)[i]);
        }
    }
    canon += ";format=" + f.format + ";mixdown=" + (f.mixdown ? "1" : "0");
    canon += ";sampling_rate=" + (f.sampling_rate ? std::to_string(*f.sampling_rate) : "");
    return compute_digest(canon).substr(0, 8);
}

bool conforms(const MediaInfo& info, const Flavour& f) {
    if (f.bit_depth && info.bit_depth != *f.bit_depth) return false;
    if (f.sampling_rate && info.sampling_rate != *f.sampling_rate) return false;
    if (f.mixdown && info.channels != 1) return false;
    if (f.channels) {
        if (static_cast<int>(f.channels->size()) != info.channels) return false;
        for (int i = 0; i < info.channels; ++i) {
            if ((*f.channels)[i] != i) return false;
        }
    }
    return true;
}

namespace {

constexpr int kZeroCrossings = 16;
constexpr double kKaiserBeta = 8.0;
constexpr double kRolloff = 0.95;
constexpr std::int64_t kMaxTablePhases = 4096;

double bessel_i0(double x) {
    double sum = 1.0;
    double term = 1.0;
    const double q = x * x / 4.0;
    for (int k = 1; k < 64; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return sum;
}

class SincKernel {
public:
    SincKernel(double cutoff, int half_width)
        : cutoff_(cutoff), half_width_(half_width), norm_(1.0 / bessel_i0(kKaiserBeta)) {}

    int half_width() const { return half_width_; }

    // Taps for input indices base-half_width+1 .. base+half_width, normalised to unit sum.
    void taps(double frac, std::vector<double>& out) const {
        out.resize(2 * half_width_);
        double sum = 0;
        for (int j = 0; j < 2 * half_width_; ++j) {
            const double dist = (j - half_width_ + 1) - frac;
            const double t = dist / half_width_;
            double w = 0;
            if (std::abs(t) < 1.0) w = bessel_i0(kKaiserBeta * std::sqrt(1.0 - t * t)) * norm_;
            const double x = cutoff_ * dist;
            const double sinc = x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
            out[j] = cutoff_ * sinc * w;
            sum += out[j];
        }
        for (double& v : out) v /= sum;
    }

private:
    double cutoff_;
    int half_width_;
    double norm_;
};

}  // namespace

AudioBuffer resample(const AudioBuffer& buf, int target_rate) {
    if (target_rate <= 0) fail(ErrorCode::InvalidArgument, "target sampling rate must be positive");
    if (buf.sampling_rate <= 0) fail(ErrorCode::InvalidArgument, "source sampling rate must be positive");
    if (target_rate == buf.sampling_rate) return buf;

    const std::int64_t g = std::gcd<std::int64_t>(buf.sampling_rate, target_rate);
    const std::int64_t up = target_rate / g;
    const std::int64_t down = buf.sampling_rate / g;
    const double cutoff = std::min(1.0, static_cast<double>(target_rate) / buf.sampling_rate) * kRolloff;
    const SincKernel kernel(cutoff, static_cast<int>(std::ceil(kZeroCrossings / cutoff)));
    const int hw = kernel.half_width();

    const auto frames = static_cast<std::int64_t>(buf.frames());
    const std::int64_t out_frames = (frames * target_rate * 2 + buf.sampling_rate) / (2 * buf.sampling_rate);

    std::vector<std::vector<double>> table;
    if (up <= kMaxTablePhases) {
        table.resize(static_cast<std::size_t>(up));
        for (std::int64_t p = 0; p < up; ++p) kernel.taps(static_cast<double>(p) / up, table[p]);
    }

    AudioBuffer out;
    out.sampling_rate = target_rate;
    out.source_format = buf.source_format;
    out.channels.assign(buf.channel_count(), std::vector<double>(static_cast<std::size_t>(out_frames)));
    if (frames == 0) return out;

    std::vector<double> scratch;
    for (std::int64_t n = 0; n < out_frames; ++n) {
        const std::int64_t pos = n * down;
        const std::int64_t base = pos / up;
        const std::int64_t phase = pos % up;
        const std::vector<double>* taps = nullptr;
        if (!table.empty()) {
            taps = &table[phase];
        } else {
            kernel.taps(static_cast<double>(phase) / up, scratch);
            taps = &scratch;
        }
        for (std::size_t c = 0; c < buf.channel_count(); ++c) {
            const auto& in = buf.channels[c];
            double acc = 0;
            for (int j = 0; j < 2 * hw; ++j) {
                const std::int64_t i = std::clamp<std::int64_t>(base - hw + 1 + j, 0, frames - 1);
                acc += (*taps)[j] * in[static_cast<std::size_t>(i)];
            }
            out.channels[c][static_cast<std::size_t>(n)] = acc;
        }
    }
    return out;
}

AudioBuffer remix(const AudioBuffer& buf, const std::optional<std::vector<int>>& channels, bool mixdown) {
    if (channels && mixdown) fail(ErrorCode::InvalidArgument, "channel selection and mixdown are mutually exclusive");
    if (channels) {
        AudioBuffer out;
        out.sampling_rate = buf.sampling_rate;
        out.source_format = buf.source_format;
        for (int c : *channels) {
            if (c < 0 || static_cast<std::size_t>(c) >= buf.channel_count()) {
                fail(ErrorCode::InvalidArgument, "channel index " + std::to_string(c) + " out of range for " +
                                                     std::to_string(buf.channel_count()) + " channels");
            }
            out.channels.push_back(buf.channels[static_cast<std::size_t>(c)]);
        }
        return out;
    }
    if (mixdown) {
        AudioBuffer out;
        out.sampling_rate = buf.sampling_rate;
        out.source_format = buf.source_format;
        std::vector<double> mono(buf.frames(), 0.0);
        for (const auto& ch : buf.channels) {
            for (std::size_t i = 0; i < mono.size(); ++i) mono[i] += ch[i];
        }
        const double n = static_cast<double>(std::max<std::size_t>(buf.channel_count(), 1));
        for (double& v : mono) v /= n;
        out.channels.push_back(std::move(mono));
        return out;
    }
    return buf;
}

MediaInfo convert(const fs::path& in, const Flavour& f, const fs::path& out) {
    validate_flavour(f);
    const MediaInfo info = scan_media(in);
    if (f.is_raw() || conforms(info, f)) {
        atomic_copy(in, out);
        return info;
    }
    AudioBuffer buf = read_wav(in);
    buf = remix(buf, f.channels, f.mixdown);
    if (f.sampling_rate) buf = resample(buf, *f.sampling_rate);

    int depth = f.bit_depth.value_or(info.bit_depth);
    SampleFormat format = SampleFormat::Int;
    if (!f.bit_depth && buf.source_format == SampleFormat::Float) {
        format = SampleFormat::Float;
    }
    if (depth == 8) depth = 16;

    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    const fs::path tmp = out.string() + ".tmp." + unique_suffix();
    try {
        write_wav(buf, depth, tmp, format);
        fs::rename(tmp, out);
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
    return scan_media(out);
}

}  // namespace audvault
