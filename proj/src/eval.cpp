#include "skelvol/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

#include "skelvol/error.hpp"
#include "skelvol/parallel.hpp"
#include "skelvol/rng.hpp"

namespace skelvol {

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::CrossSubject: return "cross_subject";
    case Protocol::CrossView: return "cross_view";
    case Protocol::SubjectList: return "subject_list";
  }
  return "unknown";
}

Protocol parse_protocol(std::string_view name) {
  if (name == "cross_subject") return Protocol::CrossSubject;
  if (name == "cross_view") return Protocol::CrossView;
  if (name == "subject_list") return Protocol::SubjectList;
  throw Error(ErrorCode::InvalidParams, "unknown split protocol '" + std::string(name) + "'");
}

SplitSpec SplitSpec::cross_subject() {
  SplitSpec s;
  s.protocol = Protocol::CrossSubject;
  s.train_ids.insert(kNtuCrossSubjectTrain.begin(), kNtuCrossSubjectTrain.end());
  for (int id = 1; id <= 40; ++id)
    if (!s.train_ids.count(id)) s.test_ids.insert(id);
  return s;
}

SplitSpec SplitSpec::cross_view() { return {Protocol::CrossView, {2, 3}, {1}}; }

SplitSpec SplitSpec::smart_home() { return {Protocol::SubjectList, {1, 3, 5, 7, 9}, {2, 4, 6, 8}}; }

void SplitSpec::validate() const {
  if (train_ids.empty() || test_ids.empty()) throw Error(ErrorCode::InvalidParams, "split needs nonempty train and test id sets");
  for (int id : train_ids)
    if (test_ids.count(id)) throw Error(ErrorCode::InvalidParams, "id " + std::to_string(id) + " is in both train and test sets");
}

SampleMeta meta_of(const SkeletonSequence& seq) { return {seq.subject_id, seq.camera_id}; }

IndexSplit split_dataset(std::span<const SampleMeta> samples, const SplitSpec& spec) {
  spec.validate();
  const bool by_camera = spec.protocol == Protocol::CrossView;
  const char* what = by_camera ? "camera" : "subject";
  IndexSplit out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& id = by_camera ? samples[i].camera_id : samples[i].subject_id;
    if (!id) throw Error(ErrorCode::MissingMetadata, "sample " + std::to_string(i) + " has no " + what + " id");
    if (spec.train_ids.count(*id)) out.train.push_back(i);
    else if (spec.test_ids.count(*id)) out.test.push_back(i);
    else
      throw Error(ErrorCode::MissingMetadata, "sample " + std::to_string(i) + ": " + what + " id " + std::to_string(*id) +
                                                  " is not assigned by the split");
  }
  if (out.train.empty()) throw Error(ErrorCode::EmptyPartition, "training partition is empty");
  if (out.test.empty()) throw Error(ErrorCode::EmptyPartition, "test partition is empty");
  return out;
}

IndexSplit validation_split(std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error(ErrorCode::InvalidParams, "validation fraction must lie in (0, 1)");
  const auto m = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (m == 0 || m >= n)
    throw Error(ErrorCode::TooFewSamples, "cannot hold out " + std::to_string(m) + " of " + std::to_string(n) + " samples");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(mix_seed(seed, 0x7A11D));
  shuffle(perm.begin(), perm.end(), rng);
  IndexSplit out;
  out.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m));
  out.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(m), perm.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

EvalReport make_report(std::span<const std::size_t> truth, std::span<const std::size_t> predicted, std::size_t classes) {
  if (truth.size() != predicted.size()) throw Error(ErrorCode::InvalidParams, "truth and prediction lengths differ");
  if (classes < 1) throw Error(ErrorCode::InvalidParams, "report needs at least one class");
  if (truth.empty()) throw Error(ErrorCode::EmptyPartition, "no samples to evaluate");
  EvalReport r;
  r.classes = classes;
  r.samples = truth.size();
  r.class_counts.assign(classes, 0);
  std::vector<std::vector<std::size_t>> counts(classes, std::vector<std::size_t>(classes, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= classes || predicted[i] >= classes)
      throw Error(ErrorCode::InvalidTarget, "label out of range for " + std::to_string(classes) + " classes");
    ++counts[truth[i]][predicted[i]];
    ++r.class_counts[truth[i]];
    if (truth[i] == predicted[i]) ++correct;
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  r.per_class_accuracy.assign(classes, std::numeric_limits<double>::quiet_NaN());
  r.confusion.assign(classes, std::vector<double>(classes, 0.0));
  for (std::size_t c = 0; c < classes; ++c) {
    const std::size_t n = r.class_counts[c];
    if (n == 0) continue;
    for (std::size_t p = 0; p < classes; ++p) r.confusion[c][p] = static_cast<double>(counts[c][p]) / static_cast<double>(n);
    r.per_class_accuracy[c] = r.confusion[c][c];
  }
  return r;
}

template <typename T>
EvalReport evaluate(const MultiTemporalModel<T>& model, std::span<const SkeletonSequence> test, const PipelineConfig& cfg,
                    std::size_t threads) {
  if (test.empty()) throw Error(ErrorCode::EmptyPartition, "test set is empty");
  std::vector<std::size_t> truth(test.size()), pred(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (!test[i].label) throw Error(ErrorCode::MissingMetadata, "test sample " + std::to_string(i) + " has no label");
    truth[i] = static_cast<std::size_t>(*test[i].label);
  }
  parallel_chunks(test.size(), threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) pred[i] = run_pipeline(test[i], model, cfg);
  });
  return make_report(truth, pred, model.classes());
}

template <typename T>
std::vector<AblationRow> evaluate_ablation(const MultiTemporalModel<T>& model, std::span<const LabeledEncoding> test,
                                           LevelFusion fusion, std::size_t threads) {
  if (test.empty()) throw Error(ErrorCode::EmptyPartition, "test set is empty");
  const std::vector<int> levels = model.available_levels();
  if (levels.empty() || levels.front() != 0) throw Error(ErrorCode::InvalidParams, "ablation needs a level-0 model");

  std::vector<PipelineScores> scores(test.size());
  parallel_chunks(test.size(), threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) scores[i] = score_encoded(*test[i].encoded, model, levels, fusion);
  });

  std::vector<std::size_t> truth(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) truth[i] = test[i].label;
  const std::size_t K = model.classes();
  std::vector<AblationRow> rows;
  auto add_row = [&](std::string name, auto&& pick) {
    std::vector<std::size_t> pred(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) pred[i] = predict_label(pick(scores[i]));
    rows.push_back({std::move(name), make_report(truth, pred, K)});
  };
  add_row("spatial", [](const PipelineScores& s) -> const std::vector<double>& { return *s.spatial[0]; });
  add_row("temporal", [](const PipelineScores& s) -> const std::vector<double>& { return *s.temporal[0]; });
  add_row("two-stream", [](const PipelineScores& s) -> const std::vector<double>& { return *s.fused[0]; });
  std::string combined_name = "Level ";
  for (int l : levels) {
    const auto idx = static_cast<std::size_t>(l);
    add_row("Level " + std::to_string(l), [idx](const PipelineScores& s) -> const std::vector<double>& {
      return s.fused[idx] ? *s.fused[idx] : *s.fused[0];
    });
    combined_name += (l == levels.front() ? "" : "+") + std::to_string(l);
  }
  add_row(combined_name, [](const PipelineScores& s) -> const std::vector<double>& { return s.combined; });
  return rows;
}

std::vector<std::string> default_class_names(std::size_t classes) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < classes; ++c) names.push_back("class_" + std::to_string(c));
  return names;
}

namespace {

const std::string& name_at(std::span<const std::string> names, std::size_t c, std::vector<std::string>& fallback) {
  if (c < names.size()) return names[c];
  fallback = default_class_names(c + 1);
  return fallback.back();
}

}  // namespace

void write_per_class_csv(std::ostream& out, const EvalReport& report, std::span<const std::string> class_names) {
  std::vector<std::string> tmp;
  out << "class,name,count,accuracy\n" << std::setprecision(17);
  for (std::size_t c = 0; c < report.classes; ++c)
    out << c << ',' << name_at(class_names, c, tmp) << ',' << report.class_counts[c] << ',' << report.per_class_accuracy[c] << '\n';
}

void write_confusion_csv(std::ostream& out, const EvalReport& report, std::span<const std::string> class_names) {
  std::vector<std::string> tmp;
  out << "truth\\predicted";
  for (std::size_t c = 0; c < report.classes; ++c) out << ',' << name_at(class_names, c, tmp);
  out << '\n' << std::setprecision(17);
  for (std::size_t r = 0; r < report.classes; ++r) {
    out << name_at(class_names, r, tmp);
    for (double v : report.confusion[r]) out << ',' << v;
    out << '\n';
  }
}

void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows) {
  out << "mode,samples,accuracy\n" << std::setprecision(17);
  for (const auto& r : rows) out << r.name << ',' << r.report.samples << ',' << r.report.accuracy << '\n';
}

void write_summary(std::ostream& out, std::span<const AblationRow> rows, std::span<const std::string> class_names) {
  if (rows.empty()) return;
  out << "samples: " << rows.front().report.samples << "\n\n";
  for (const auto& r : rows)
    out << std::left << std::setw(16) << r.name << std::right << std::fixed << std::setprecision(2) << 100.0 * r.report.accuracy
        << "%\n";
  const EvalReport& best = rows.back().report;
  std::vector<std::string> tmp;
  out << "\nper-class accuracy (" << rows.back().name << "):\n";
  for (std::size_t c = 0; c < best.classes; ++c) {
    out << "  " << std::left << std::setw(20) << name_at(class_names, c, tmp) << std::right;
    if (best.class_counts[c] == 0) out << "n/a\n";
    else out << std::fixed << std::setprecision(2) << 100.0 * best.per_class_accuracy[c] << "% (" << best.class_counts[c] << ")\n";
  }
  out.unsetf(std::ios::floatfield);
}

#define SKELVOL_INSTANTIATE_EVAL(T)                                                                              \
  template EvalReport evaluate(const MultiTemporalModel<T>&, std::span<const SkeletonSequence>, const PipelineConfig&, \
                               std::size_t);                                                                     \
  template std::vector<AblationRow> evaluate_ablation(const MultiTemporalModel<T>&, std::span<const LabeledEncoding>, \
                                                      LevelFusion, std::size_t);

SKELVOL_INSTANTIATE_EVAL(float)
SKELVOL_INSTANTIATE_EVAL(double)

#undef SKELVOL_INSTANTIATE_EVAL

}  // namespace skelvol
