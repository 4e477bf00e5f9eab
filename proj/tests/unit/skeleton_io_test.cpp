#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "skelvol/error.hpp"
#include "skelvol/skeleton_io.hpp"

using namespace skelvol;
using namespace skelvol::testing;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kGolden = std::string(SKELVOL_TEST_DATA_DIR) + "/S001C002P003R001A008.skeleton";
const std::string kGoldenReference = std::string(SKELVOL_TEST_DATA_DIR) + "/S001C002P003R001A008.reference.csv";

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::InvalidParams;
}

}  // namespace

TEST(NtuParser, MinimalZeroFile) {
  NtuBody b;
  b.joints.assign(25, Vec3{});
  auto seq = parse_ntu_skeleton(ntu_text({{b}}));
  ASSERT_EQ(seq.frame_count(), 1u);
  EXPECT_EQ(seq.frames[0].frame_index, 1);
  ASSERT_EQ(seq.frames[0].joints.size(), 25u);
  for (const auto& j : seq.frames[0].joints) EXPECT_EQ(j, (Vec3{0, 0, 0}));
}

TEST(NtuParser, TwentyFourJointsIsMalformed) {
  NtuBody b = ntu_body(1, 0.5);
  b.joints.pop_back();
  EXPECT_EQ(code_of([&] { parse_ntu_skeleton(ntu_text({{b}})); }), ErrorCode::MalformedFile);
}

TEST(NtuParser, MissingJointLineIsMalformed) {
  std::string text = ntu_text({{ntu_body(1, 0.5)}});
  text = text.substr(0, text.rfind('\n', text.size() - 2) + 1);  // drop last joint line, keep the "25"
  EXPECT_EQ(code_of([&] { parse_ntu_skeleton(text); }), ErrorCode::MalformedFile);
}

TEST(NtuParser, RejectsBadTokens) {
  const std::string good = ntu_text({{ntu_body(1, 0.5)}});
  for (const std::string& bad : {std::string("nan"), std::string("inf"), std::string("1.0x"), std::string("")}) {
    std::string text = good;
    const auto pos = text.find("100 200");
    text.replace(pos, 3, bad);
    EXPECT_EQ(code_of([&] { parse_ntu_skeleton(text); }), ErrorCode::MalformedFile) << bad;
  }
}

TEST(NtuParser, TrailingDataIsMalformed) {
  EXPECT_EQ(code_of([&] { parse_ntu_skeleton(ntu_text({{ntu_body(1, 0.5)}}) + "7\n"); }), ErrorCode::MalformedFile);
}

TEST(NtuParser, BodilessFramesDroppedAndRenumbered) {
  auto seq = parse_ntu_skeleton(ntu_text({{ntu_body(1, 0.1)}, {}, {ntu_body(1, 0.3)}}));
  ASSERT_EQ(seq.frame_count(), 2u);
  EXPECT_EQ(seq.frames[1].frame_index, 2);
  EXPECT_DOUBLE_EQ(seq.frames[1](1).y, 0.3);
}

TEST(NtuParser, AllFramesEmptyIsEmptySequence) {
  EXPECT_EQ(code_of([&] { parse_ntu_skeleton(ntu_text({{}, {}})); }), ErrorCode::EmptySequence);
  EXPECT_EQ(code_of([&] { parse_ntu_skeleton("0\n"); }), ErrorCode::EmptySequence);
}

TEST(NtuParser, KeepsMostFrequentBody) {
  // Body 9 is in 3 frames, body 4 in 2; frames without body 9 are dropped.
  auto seq = parse_ntu_skeleton(ntu_text({{ntu_body(4, 0.1), ntu_body(9, 0.2)},
                                          {ntu_body(9, 0.3)},
                                          {ntu_body(4, 0.4)},
                                          {ntu_body(9, 0.5), ntu_body(5, 0.6)}}));
  ASSERT_EQ(seq.frame_count(), 3u);
  EXPECT_DOUBLE_EQ(seq.frames[0](1).y, 0.2);
  EXPECT_DOUBLE_EQ(seq.frames[1](1).y, 0.3);
  EXPECT_DOUBLE_EQ(seq.frames[2](1).y, 0.5);
}

TEST(NtuParser, BodyTieGoesToLowestId) {
  auto seq = parse_ntu_skeleton(ntu_text({{ntu_body(8, 0.1), ntu_body(3, 0.2)}, {ntu_body(8, 0.3), ntu_body(3, 0.4)}}));
  ASSERT_EQ(seq.frame_count(), 2u);
  EXPECT_DOUBLE_EQ(seq.frames[0](1).y, 0.2);
  EXPECT_DOUBLE_EQ(seq.frames[1](1).y, 0.4);
}

TEST(NtuParser, GoldenMatchesReferenceExtraction) {
  const auto seq = parse_ntu_skeleton(read_file(kGolden));
  std::ifstream ref(kGoldenReference);
  ASSERT_TRUE(ref) << kGoldenReference;
  std::string line;
  std::getline(ref, line);
  std::size_t rows = 0;
  while (std::getline(ref, line)) {
    std::istringstream ss(line);
    std::string tok[5];
    for (auto& t : tok) std::getline(ss, t, ',');
    const int f = std::stoi(tok[0]), j = std::stoi(tok[1]);
    ASSERT_LE(static_cast<std::size_t>(f), seq.frame_count());
    const Vec3& p = seq.frames[static_cast<std::size_t>(f - 1)](j);
    EXPECT_EQ(p.x, std::strtod(tok[2].c_str(), nullptr)) << line;
    EXPECT_EQ(p.y, std::strtod(tok[3].c_str(), nullptr)) << line;
    EXPECT_EQ(p.z, std::strtod(tok[4].c_str(), nullptr)) << line;
    ++rows;
  }
  EXPECT_EQ(rows, seq.frame_count() * 25);
  EXPECT_EQ(seq.frame_count(), 15u);  // one of 16 frames has no body
}

TEST(NtuParser, GoldenFileMetadataFromName) {
  const auto seq = load_sequence_file(kGolden);
  EXPECT_EQ(seq.camera_id, 2);
  EXPECT_EQ(seq.subject_id, 3);
  EXPECT_EQ(seq.label, 7);
  EXPECT_EQ(seq.source_path, kGolden);
}

TEST(NtuFilename, Metadata) {
  SkeletonSequence s;
  EXPECT_TRUE(apply_ntu_filename_metadata("S017C003P020R002A060.skeleton", s));
  EXPECT_EQ(s.camera_id, 3);
  EXPECT_EQ(s.subject_id, 20);
  EXPECT_EQ(s.label, 59);
  SkeletonSequence t;
  EXPECT_FALSE(apply_ntu_filename_metadata("walk.skeleton", t));
  EXPECT_FALSE(t.label.has_value());
}

namespace {

std::string csv_rows(const SkeletonSequence& seq) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& f : seq.frames)
    for (std::size_t j = 0; j < kJointCount; ++j)
      out << f.frame_index << ',' << j + 1 << ',' << f.joints[j].x << ',' << f.joints[j].y << ',' << f.joints[j].z << '\n';
  return out.str();
}

}  // namespace

TEST(CsvParser, SingleFrame) {
  auto src = random_sequence(1, 3);
  auto seq = parse_csv_sequence(csv_rows(src));
  EXPECT_EQ(seq, src);
}

TEST(CsvParser, HeaderOptional) {
  auto src = random_sequence(2, 4);
  EXPECT_EQ(parse_csv_sequence("frame,joint,x,y,z\n" + csv_rows(src)), src);
}

TEST(CsvParser, ShuffledRowsMatchSorted) {
  auto src = random_sequence(3, 5);
  std::string text = csv_rows(src);
  std::vector<std::string> lines;
  std::istringstream ss(text);
  for (std::string l; std::getline(ss, l);) lines.push_back(l);
  Rng rng(11);
  shuffle(lines.begin(), lines.end(), rng);
  std::string shuffled;
  for (const auto& l : lines) shuffled += l + "\n";
  EXPECT_EQ(parse_csv_sequence(shuffled), parse_csv_sequence(text));
}

TEST(CsvParser, DuplicateRowIsMalformed) {
  std::string text = csv_rows(random_sequence(1, 6));
  text += text.substr(0, text.find('\n') + 1);
  EXPECT_EQ(code_of([&] { parse_csv_sequence(text); }), ErrorCode::MalformedFile);
}

TEST(CsvParser, MissingJoint) {
  std::string text = csv_rows(random_sequence(2, 7));
  text = text.substr(0, text.rfind('\n', text.size() - 2) + 1);
  EXPECT_EQ(code_of([&] { parse_csv_sequence(text); }), ErrorCode::MissingJoint);
}

TEST(CsvParser, BadRows) {
  EXPECT_EQ(code_of([] { parse_csv_sequence("1,1,0,0\n"); }), ErrorCode::MalformedFile);
  EXPECT_EQ(code_of([] { parse_csv_sequence("1,26,0,0,0\n"); }), ErrorCode::MalformedFile);
  EXPECT_EQ(code_of([] { parse_csv_sequence("0,1,0,0,0\n"); }), ErrorCode::MalformedFile);
  EXPECT_EQ(code_of([] { parse_csv_sequence("1,1,0,nan,0\n"); }), ErrorCode::MalformedFile);
}

TEST(CsvParser, FrameGapsRenumbered) {
  auto src = random_sequence(2, 8);
  src.frames[1].frame_index = 5;
  auto seq = parse_csv_sequence(csv_rows(src));
  ASSERT_EQ(seq.frame_count(), 2u);
  EXPECT_EQ(seq.frames[1].frame_index, 2);
  EXPECT_EQ(seq.frames[1].joints, src.frames[1].joints);
}

TEST(SequenceFormat, RoundTripWithMetadata) {
  auto seq = random_sequence(7, 9);
  seq.label = 12;
  seq.subject_id = 4;
  seq.camera_id = 1;
  seq.source_path = "some/where.skeleton";
  std::stringstream buf;
  write_sequence(buf, seq);
  EXPECT_EQ(read_sequence(buf), seq);
}

TEST(SequenceFormat, RoundTripBareAndExtremeValues) {
  auto seq = random_sequence(2, 10);
  seq.frames[0].joints[0] = {-0.0, 1e-308, 1.7976931348623157e308};
  seq.frames[1].joints[3] = {4.9e-324, -123456.789, 0.1};
  std::stringstream buf;
  write_sequence(buf, seq);
  const auto back = read_sequence(buf);
  EXPECT_EQ(back, seq);
  EXPECT_TRUE(std::signbit(back.frames[0].joints[0].x));
}

TEST(SequenceFormat, TruncatedIsIoError) {
  std::stringstream buf;
  write_sequence(buf, random_sequence(3, 11));
  const std::string full = buf.str();
  for (std::size_t n : {std::size_t{0}, std::size_t{3}, std::size_t{9}, full.size() / 2, full.size() - 1}) {
    std::stringstream cut(full.substr(0, n));
    EXPECT_EQ(code_of([&] { read_sequence(cut); }), ErrorCode::IoError) << n;
  }
}

TEST(SequenceFormat, WrongMagicOrVersion) {
  std::stringstream buf;
  write_sequence(buf, random_sequence(1, 12));
  std::string bytes = buf.str();
  std::string magic = bytes;
  magic[0] = 'X';
  std::stringstream a(magic);
  EXPECT_EQ(code_of([&] { read_sequence(a); }), ErrorCode::VersionMismatch);
  std::string version = bytes;
  version[4] = 2;
  std::stringstream b(version);
  EXPECT_EQ(code_of([&] { read_sequence(b); }), ErrorCode::VersionMismatch);
}

TEST(SequenceFiles, ErrorsNameThePath) {
  try {
    load_sequence_file("/nonexistent/dir/x.skeleton");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/x.skeleton"), std::string::npos);
  }
  const auto dir = std::filesystem::temp_directory_path() / "skelvol_io_test";
  std::filesystem::create_directories(dir);
  const auto bad = (dir / "junk.txt").string();
  std::ofstream(bad) << "hello";
  EXPECT_EQ(code_of([&] { load_sequence_file(bad); }), ErrorCode::MalformedFile);
  const auto broken = (dir / "broken.skeleton").string();
  std::ofstream(broken) << "1\n1\n";
  try {
    load_sequence_file(broken);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedFile);
    EXPECT_NE(std::string(e.what()).find(broken), std::string::npos);
  }
}

TEST(SequenceFiles, SaveLoadRoundTrip) {
  auto seq = random_sequence(4, 13);
  seq.label = 1;
  const auto path = (std::filesystem::temp_directory_path() / "skelvol_rt.sksq").string();
  save_sequence_file(path, seq);
  auto back = load_sequence_file(path);
  EXPECT_EQ(back.source_path, path);
  back.source_path.reset();
  EXPECT_EQ(back, seq);
}
