#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "skelvol/eval.hpp"
#include "skelvol/run_config.hpp"
#include "skelvol/two_stream.hpp"

namespace skelvol {

/// One sequence of an encoded dataset directory.
struct EncodedSample {
  std::string name;    // subdirectory holding the volumes
  std::string source;  // original skeleton file
  std::optional<int> label;
  std::optional<int> subject_id;
  std::optional<int> camera_id;
  std::size_t frames = 0;
  EncodedSequence encoded;
};

/// Directory written by `encode`: manifest.json plus
/// <name>/L<level>_<spatial|temporal>.skvg per sample.
struct EncodedDataset {
  EncodingConfig encoding;
  std::vector<int> levels;
  std::vector<std::string> class_names;
  std::vector<EncodedSample> samples;

  std::size_t classes() const { return class_names.size(); }
  std::vector<SampleMeta> metadata() const;
};

std::string volume_relpath(const std::string& sample, int level, StreamKind kind);

/// Writes volumes and manifest.json into `dir`.
void save_encoded_dataset(const std::string& dir, const EncodedDataset& ds);
/// With `load_volumes` off only the manifest is read.
EncodedDataset load_encoded_dataset(const std::string& dir, bool load_volumes = true);

/// One stream checkpoint in a bundle.
struct BundleEntry {
  int level = 0;
  StreamKind kind = StreamKind::Spatial;
  std::string checkpoint;  // relative to the bundle directory
  std::string log;
};

/// Self-describing model bundle: manifest.json plus one checkpoint per
/// (level, stream).
struct BundleManifest {
  Precision precision = Precision::Float32;
  std::size_t classes = 0;
  std::size_t resolution = 0;
  std::vector<std::string> class_names;
  EncodingConfig encoding;
  std::vector<int> levels;
  std::vector<BundleEntry> networks;
};

std::string checkpoint_name(int level, StreamKind kind);
std::string log_name(int level, StreamKind kind);

void write_bundle_manifest(const std::string& dir, const BundleManifest& m);
BundleManifest read_bundle_manifest(const std::string& dir);

template <typename T>
void save_bundle_checkpoints(const std::string& dir, const MultiTemporalModel<T>& model);
/// IncompatibleCheckpoint when a checkpoint disagrees with the manifest.
template <typename T>
MultiTemporalModel<T> load_bundle(const std::string& dir, const BundleManifest& m);

/// Throws IncompatibleCheckpoint unless the bundle's class count,
/// resolution and preprocessing match the dataset.
void check_compatible(const BundleManifest& m, const EncodedDataset& ds);

}  // namespace skelvol
