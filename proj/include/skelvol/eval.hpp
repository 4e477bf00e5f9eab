#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skelvol/skeleton.hpp"
#include "skelvol/two_stream.hpp"

namespace skelvol {

enum class Protocol { CrossSubject, CrossView, SubjectList };
std::string_view to_string(Protocol p);
Protocol parse_protocol(std::string_view name);

/// Standard NTU RGB+D cross-subject training performers.
inline constexpr std::array<int, 20> kNtuCrossSubjectTrain{1,  2,  4,  5,  8,  9,  13, 14, 15, 16,
                                                           17, 18, 19, 25, 27, 28, 31, 34, 35, 38};

/// CrossView ids are cameras; the others are subjects.
struct SplitSpec {
  Protocol protocol = Protocol::CrossSubject;
  std::set<int> train_ids;
  std::set<int> test_ids;

  /// Train on kNtuCrossSubjectTrain, test on the other subjects 1..40.
  static SplitSpec cross_subject();
  /// Test on camera 1, train on cameras 2 and 3.
  static SplitSpec cross_view();
  /// Train subjects {1,3,5,7,9}, test {2,4,6,8}.
  static SplitSpec smart_home();

  /// InvalidParams unless both sets are nonempty and disjoint.
  void validate() const;
};

struct SampleMeta {
  std::optional<int> subject_id;
  std::optional<int> camera_id;
};

SampleMeta meta_of(const SkeletonSequence& seq);

struct IndexSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Partitions sample indices (ascending order kept). Throws MissingMetadata
/// when a sample lacks the id the protocol uses or its id is in neither set,
/// and EmptyPartition when a side would be empty.
IndexSplit split_dataset(std::span<const SampleMeta> samples, const SplitSpec& spec);

/// Random disjoint split into (train', validation) index lists over 0..n-1
/// with round(fraction*n) validation samples. InvalidParams unless
/// 0 < fraction < 1; TooFewSamples when either side would be empty.
IndexSplit validation_split(std::size_t n, double fraction, std::uint64_t seed);

struct EvalReport {
  std::size_t classes = 0;
  std::size_t samples = 0;
  double accuracy = 0.0;
  std::vector<std::size_t> class_counts;
  std::vector<double> per_class_accuracy;      // NaN for classes absent from the truth
  std::vector<std::vector<double>> confusion;  // row = truth, column = prediction; rows of absent classes are 0
};

/// InvalidParams on length mismatch or K < 1, InvalidTarget on a label >= K,
/// EmptyPartition on no samples.
EvalReport make_report(std::span<const std::size_t> truth, std::span<const std::size_t> predicted, std::size_t classes);

/// run_pipeline over labelled sequences. MissingMetadata for an unlabeled
/// sample, EmptyPartition on an empty set.
template <typename T>
EvalReport evaluate(const MultiTemporalModel<T>& model, std::span<const SkeletonSequence> test, const PipelineConfig& cfg,
                    std::size_t threads = 1);

/// One row of an ablation table.
struct AblationRow {
  std::string name;
  EvalReport report;
};

/// Rows "spatial", "temporal", "two-stream" (level 0), "Level 0" .. "Level 3"
/// for the levels the model has, and "Level 0+1+2+3" (all model levels fused).
/// A sample without volumes at some level is scored by its level-0 fused
/// output in that level's row.
template <typename T>
std::vector<AblationRow> evaluate_ablation(const MultiTemporalModel<T>& model, std::span<const LabeledEncoding> test,
                                           LevelFusion fusion, std::size_t threads = 1);

/// `class,name,count,accuracy` per class.
void write_per_class_csv(std::ostream& out, const EvalReport& report, std::span<const std::string> class_names);
/// Header `truth\predicted,<names...>`, one row per true class.
void write_confusion_csv(std::ostream& out, const EvalReport& report, std::span<const std::string> class_names);
/// `mode,samples,accuracy` per ablation row.
void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows);
void write_summary(std::ostream& out, std::span<const AblationRow> rows, std::span<const std::string> class_names);

/// "class_<i>" names used when none are supplied.
std::vector<std::string> default_class_names(std::size_t classes);

}  // namespace skelvol
