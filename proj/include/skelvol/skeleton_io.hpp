#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "skelvol/skeleton.hpp"

namespace skelvol {

/// Parses an NTU RGB+D `.skeleton` text file. Only one body is kept: the
/// body id present in the most frames (ties go to the lowest id). Frames in
/// which that body is absent are dropped and the rest renumbered.
///
/// Throws MalformedFile on any layout violation and EmptySequence when no
/// frame survives.
SkeletonSequence parse_ntu_skeleton(std::string_view text);

/// Parses `frame,joint,x,y,z` rows (optional header). Rows may be in any
/// order; frames are sorted by index and renumbered 1..F.
///
/// Throws MalformedFile (including duplicate rows) or MissingJoint.
SkeletonSequence parse_csv_sequence(std::string_view text);

/// Serializes to the versioned little-endian `.sksq` format (see docs/formats.md).
void write_sequence(std::ostream& out, const SkeletonSequence& seq);

/// Throws IoError on truncation, VersionMismatch on unknown magic or version.
SkeletonSequence read_sequence(std::istream& in);

/// Fills subject/camera/label from an NTU-style name such as
/// `S001C002P003R001A017.skeleton` when the pattern matches. Returns whether
/// it matched.
bool apply_ntu_filename_metadata(std::string_view filename, SkeletonSequence& seq);

/// Loads by extension: `.skeleton` (NTU text), `.csv`, `.sksq` (binary).
/// Errors carry the offending path.
SkeletonSequence load_sequence_file(const std::string& path);

void save_sequence_file(const std::string& path, const SkeletonSequence& seq);

}  // namespace skelvol
