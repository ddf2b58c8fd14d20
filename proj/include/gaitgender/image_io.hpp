#pragma once

#include <filesystem>

#include "gaitgender/silhouette.hpp"

namespace gaitgender {

/// Grayscale threshold: a pixel is foreground when its value exceeds this.
inline constexpr int kForegroundThreshold = 127;

/// Decodes a PNG or PGM (P5/P2) file, chosen by content, and thresholds it.
/// Colour PNGs are converted to gray first. Throws CorruptImage.
RawSilhouette read_silhouette(const std::filesystem::path& path);

/// Writes foreground as 255 and background as 0. The format follows the
/// extension: ".png" or anything else as binary PGM.
void write_silhouette(const std::filesystem::path& path, const Mask& mask);

}  // namespace gaitgender
