#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "gaitgender/pipeline.hpp"

namespace gaitgender {

/// Subject id to gender label. One "<subject> <gender>" pair per line,
/// gender as M/F, male/female or +1/-1; '#' starts a comment.
std::map<std::string, int> read_manifest(const std::filesystem::path& path);

/// Enumerates `<root>/<subject>/<cond>-<NN>/<VVV>/<frames>`, where cond is
/// nm, bg or cl, VVV the view in degrees and frames are PNG or PGM files
/// whose names end in the frame number. Order is lexicographic at every
/// level. Frames are decoded on demand.
///
/// Throws MissingManifest when subjects exist but the manifest does not,
/// UnknownGender for a subject absent from it, and FrameOrder when frame
/// numbers do not increase with the file names.
Dataset ingest(const std::filesystem::path& root, const std::filesystem::path& manifest);
/// Uses `<root>/manifest.txt`.
Dataset ingest(const std::filesystem::path& root);

/// Writes `dataset` in the layout ingest() reads, frames as PNG.
void export_dataset(const Dataset& dataset, const std::filesystem::path& root);

}  // namespace gaitgender
