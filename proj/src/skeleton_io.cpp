#include "skelvol/skeleton_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <regex>
#include <sstream>
#include <utility>

#include "skelvol/binary_io.hpp"
#include "skelvol/error.hpp"

namespace skelvol {
namespace {

constexpr std::string_view kSequenceMagic = "SKSQ";
constexpr std::uint32_t kSequenceVersion = 1;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

template <typename Int>
bool parse_int(std::string_view tok, Int& out) {
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

bool parse_finite(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size() && std::isfinite(out);
}

/// Iterates over non-blank lines, tracking 1-based line numbers for messages.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    while (pos_ < text_.size()) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      std::string_view raw = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_no_;
      raw = trim(raw);
      if (!raw.empty()) {
        line = raw;
        return true;
      }
    }
    return false;
  }

  std::vector<std::string_view> tokens(std::size_t expected, const char* what) {
    std::string_view line;
    if (!next(line)) throw Error(ErrorCode::MalformedFile, std::string("unexpected end of file, expected ") + what);
    auto toks = split_whitespace(line);
    if (toks.size() != expected)
      throw Error(ErrorCode::MalformedFile, "line " + std::to_string(line_no_) + ": expected " + std::to_string(expected) +
                                                " fields for " + what + ", got " + std::to_string(toks.size()));
    return toks;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

struct BodyRecord {
  std::uint64_t id = 0;
  std::vector<Joint> joints;
};

Error malformed(const LineReader& r, const std::string& msg) {
  return Error(ErrorCode::MalformedFile, "line " + std::to_string(r.line_no()) + ": " + msg);
}

}  // namespace

SkeletonSequence parse_ntu_skeleton(std::string_view text) {
  LineReader reader(text);
  std::uint64_t declared_frames = 0;
  if (!parse_int(reader.tokens(1, "frame count")[0], declared_frames)) throw malformed(reader, "frame count is not an integer");

  std::vector<std::vector<BodyRecord>> frames;
  for (std::uint64_t f = 0; f < declared_frames; ++f) {
    std::uint64_t bodies = 0;
    if (!parse_int(reader.tokens(1, "body count")[0], bodies)) throw malformed(reader, "body count is not an integer");
    std::vector<BodyRecord> records;
    for (std::uint64_t b = 0; b < bodies; ++b) {
      auto info = reader.tokens(10, "body info");
      BodyRecord rec;
      if (!parse_int(info[0], rec.id)) throw malformed(reader, "body id is not an unsigned integer");
      for (std::size_t t = 1; t < info.size(); ++t) {
        double ignored = 0.0;
        if (!parse_finite(info[t], ignored)) throw malformed(reader, "non-numeric body tracking field");
      }
      std::uint64_t joint_count = 0;
      if (!parse_int(reader.tokens(1, "joint count")[0], joint_count)) throw malformed(reader, "joint count is not an integer");
      if (joint_count != kJointCount)
        throw malformed(reader, "joint count " + std::to_string(joint_count) + " != " + std::to_string(kJointCount));
      rec.joints.reserve(kJointCount);
      for (std::size_t j = 0; j < kJointCount; ++j) {
        auto fields = reader.tokens(12, "joint");
        double values[12];
        for (std::size_t t = 0; t < 12; ++t)
          if (!parse_finite(fields[t], values[t])) throw malformed(reader, "non-numeric or non-finite joint field");
        rec.joints.push_back({values[0], values[1], values[2]});
      }
      records.push_back(std::move(rec));
    }
    frames.push_back(std::move(records));
  }
  std::string_view extra;
  if (reader.next(extra)) throw malformed(reader, "trailing data after declared frames");

  std::map<std::uint64_t, std::size_t> presence;
  for (const auto& recs : frames)
    for (const auto& r : recs) ++presence[r.id];
  if (presence.empty()) throw Error(ErrorCode::EmptySequence, "no frame contains a body");

  // std::map iterates ascending, so strict > keeps the lowest id on ties.
  std::uint64_t chosen = presence.begin()->first;
  std::size_t best = 0;
  for (const auto& [id, count] : presence)
    if (count > best) {
      best = count;
      chosen = id;
    }

  SkeletonSequence seq;
  for (const auto& recs : frames) {
    auto it = std::find_if(recs.begin(), recs.end(), [&](const BodyRecord& r) { return r.id == chosen; });
    if (it == recs.end()) continue;
    SkeletonFrame frame;
    frame.joints = it->joints;
    seq.frames.push_back(std::move(frame));
  }
  resequence(seq);
  return seq;
}

SkeletonSequence parse_csv_sequence(std::string_view text) {
  LineReader reader(text);
  std::map<long long, std::map<int, Joint>> rows;
  std::string_view line;
  bool first = true;
  while (reader.next(line)) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    long long frame = 0;
    if (first && (fields.empty() || !parse_int(fields[0], frame))) {
      first = false;
      continue;  // header row
    }
    first = false;
    if (fields.size() != 5) throw malformed(reader, "expected 5 comma-separated fields");
    int joint_id = 0;
    if (!parse_int(fields[0], frame) || frame < 1) throw malformed(reader, "frame index must be a positive integer");
    if (!parse_int(fields[1], joint_id) || joint_id < 1 || joint_id > static_cast<int>(kJointCount))
      throw malformed(reader, "joint index must be in 1.." + std::to_string(kJointCount));
    Joint p;
    if (!parse_finite(fields[2], p.x) || !parse_finite(fields[3], p.y) || !parse_finite(fields[4], p.z))
      throw malformed(reader, "non-numeric or non-finite coordinate");
    auto [_, inserted] = rows[frame].emplace(joint_id, p);
    if (!inserted)
      throw malformed(reader, "duplicate row for frame " + std::to_string(frame) + " joint " + std::to_string(joint_id));
  }
  if (rows.empty()) throw Error(ErrorCode::EmptySequence, "no data rows");

  SkeletonSequence seq;
  for (const auto& [frame, joints] : rows) {
    if (joints.size() != kJointCount) {
      int missing = 1;
      while (joints.count(missing)) ++missing;
      throw Error(ErrorCode::MissingJoint, "frame " + std::to_string(frame) + " lacks joint " + std::to_string(missing));
    }
    SkeletonFrame f;
    f.joints.reserve(kJointCount);
    for (const auto& [_, p] : joints) f.joints.push_back(p);
    seq.frames.push_back(std::move(f));
  }
  resequence(seq);
  return seq;
}

void write_sequence(std::ostream& out, const SkeletonSequence& seq) {
  using namespace binio;
  put_magic(out, kSequenceMagic);
  put_u32(out, kSequenceVersion);
  std::uint8_t flags = (seq.label ? 1u : 0u) | (seq.subject_id ? 2u : 0u) | (seq.camera_id ? 4u : 0u) |
                       (seq.source_path ? 8u : 0u);
  put_u8(out, flags);
  put_i32(out, seq.label.value_or(0));
  put_i32(out, seq.subject_id.value_or(0));
  put_i32(out, seq.camera_id.value_or(0));
  const std::string path = seq.source_path.value_or("");
  put_u32(out, static_cast<std::uint32_t>(path.size()));
  out.write(path.data(), static_cast<std::streamsize>(path.size()));
  put_u32(out, static_cast<std::uint32_t>(seq.frames.size()));
  put_u32(out, static_cast<std::uint32_t>(kJointCount));
  for (const auto& frame : seq.frames)
    for (const auto& j : frame.joints) {
      put_f64(out, j.x);
      put_f64(out, j.y);
      put_f64(out, j.z);
    }
  if (!out) throw Error(ErrorCode::IoError, "write failed");
}

SkeletonSequence read_sequence(std::istream& in) {
  using namespace binio;
  expect_magic(in, kSequenceMagic);
  const std::uint32_t version = get_u32(in);
  if (version != kSequenceVersion) throw Error(ErrorCode::VersionMismatch, "unsupported sequence version " + std::to_string(version));
  const std::uint8_t flags = get_u8(in);
  if (flags & ~0x0Fu) throw Error(ErrorCode::IoError, "unknown flag bits");
  const std::int32_t label = get_i32(in);
  const std::int32_t subject = get_i32(in);
  const std::int32_t camera = get_i32(in);
  const std::uint32_t path_len = get_u32(in);
  if (path_len > (1u << 20)) throw Error(ErrorCode::IoError, "implausible path length");
  std::string path(path_len, '\0');
  if (path_len && !in.read(path.data(), path_len)) throw Error(ErrorCode::IoError, "unexpected end of stream");

  SkeletonSequence seq;
  if (flags & 1u) seq.label = label;
  if (flags & 2u) seq.subject_id = subject;
  if (flags & 4u) seq.camera_id = camera;
  if (flags & 8u) seq.source_path = std::move(path);

  const std::uint32_t frames = get_u32(in);
  const std::uint32_t joints = get_u32(in);
  if (frames == 0) throw Error(ErrorCode::IoError, "sequence with zero frames");
  if (joints != kJointCount) throw Error(ErrorCode::IoError, "joint count " + std::to_string(joints) + " != 25");
  seq.frames.reserve(std::min<std::uint32_t>(frames, 1u << 16));
  for (std::uint32_t f = 0; f < frames; ++f) {
    SkeletonFrame frame;
    frame.frame_index = static_cast<int>(f + 1);
    frame.joints.resize(kJointCount);
    for (auto& j : frame.joints) {
      j.x = get_f64(in);
      j.y = get_f64(in);
      j.z = get_f64(in);
      if (!std::isfinite(j.x) || !std::isfinite(j.y) || !std::isfinite(j.z))
        throw Error(ErrorCode::IoError, "non-finite coordinate in stream");
    }
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

bool apply_ntu_filename_metadata(std::string_view filename, SkeletonSequence& seq) {
  static const std::regex pattern(R"(S(\d{3})C(\d{3})P(\d{3})R(\d{3})A(\d{3}))");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(filename.begin(), filename.end(), m, pattern)) return false;
  seq.camera_id = std::stoi(m[2].str());
  seq.subject_id = std::stoi(m[3].str());
  seq.label = std::stoi(m[5].str()) - 1;
  return true;
}

SkeletonSequence load_sequence_file(const std::string& path) {
  namespace fs = std::filesystem;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, path + ": cannot open for reading");
  const std::string ext = fs::path(path).extension().string();
  try {
    SkeletonSequence seq;
    if (ext == ".sksq") {
      seq = read_sequence(in);
    } else {
      std::ostringstream buf;
      buf << in.rdbuf();
      if (ext == ".csv") {
        seq = parse_csv_sequence(buf.str());
      } else if (ext == ".skeleton") {
        seq = parse_ntu_skeleton(buf.str());
        apply_ntu_filename_metadata(fs::path(path).filename().string(), seq);
      } else {
        throw Error(ErrorCode::MalformedFile, "unrecognized extension '" + ext + "'");
      }
    }
    if (!seq.source_path) seq.source_path = path;
    return seq;
  } catch (const Error& e) {
    throw e.with_context(path);
  }
}

void save_sequence_file(const std::string& path, const SkeletonSequence& seq) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, path + ": cannot open for writing");
  write_sequence(out, seq);
}

}  // namespace skelvol
