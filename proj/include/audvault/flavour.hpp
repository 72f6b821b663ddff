#pragma once

#include "audvault/wav.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace audvault {

/// Media conversion target. Unset fields keep the source property.
struct Flavour {
    std::optional<int> bit_depth;        // 16, 24 or 32
    std::optional<int> sampling_rate;    // Hz
    std::optional<std::vector<int>> channels;  // 0-based selection, may reorder or repeat
    bool mixdown = false;
    std::string format = "wav";

    bool is_raw() const { return !bit_depth && !sampling_rate && !channels && !mixdown; }
    friend bool operator==(const Flavour&, const Flavour&) = default;
};

/// Throws InvalidArgument when the flavour is not usable.
void validate_flavour(const Flavour& f);

/// "raw" for the empty flavour, otherwise 8 hex chars derived from the
/// canonical parameter string.
std::string flavour_id(const Flavour& f);

/// True when every set field of `f` already holds for a file with `info`.
bool conforms(const MediaInfo& info, const Flavour& f);

/// Windowed-sinc (Kaiser, 16 zero crossings per side) polyphase resampler.
/// Output length is round(frames * target / source); equal rates return an
/// exact copy. Signal edges are extended by repeating the end samples.
AudioBuffer resample(const AudioBuffer& buf, int target_rate);

/// Channel selection (reorder/duplicate) or mix-down to the channel mean.
AudioBuffer remix(const AudioBuffer& buf, const std::optional<std::vector<int>>& channels, bool mixdown);

/// remix -> resample -> write at the target bit depth. A raw or already
/// conforming flavour copies the bytes verbatim. Returns the output's
/// media properties.
MediaInfo convert(const std::filesystem::path& in, const Flavour& f, const std::filesystem::path& out);

}  // namespace audvault
