#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fecg/error.hpp"
#include "fecg/signal_io.hpp"
#include "fecg/synth.hpp"

using namespace fecg;
using namespace fecg::io;

namespace {

std::size_t parse_error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_csv(in, 1000.0);
  } catch (const ParseError& e) {
    return e.line();
  }
  ADD_FAILURE() << "no ParseError";
  return 0;
}

}  // namespace

TEST(Csv, HeaderedThreeRows) {
  std::istringstream in("thoracic,abdominal\n0.1,0.2\n0.3,0.4\n-0.5,0.6\n");
  const auto rec = parse_csv(in, 1000.0);
  EXPECT_EQ(rec.length(), 3u);
  EXPECT_EQ(rec.channel_names(), (std::vector<std::string>{"thoracic", "abdominal"}));
  EXPECT_DOUBLE_EQ(rec.channel("abdominal").samples[2], 0.6);
  EXPECT_DOUBLE_EQ(rec.fs, 1000.0);
}

TEST(Csv, HeaderlessWhitespaceGetsDefaultNames) {
  std::istringstream in("1 2 3\n4\t5   6\n");
  const auto rec = parse_csv(in, 250.0);
  EXPECT_EQ(rec.channel_names(), (std::vector<std::string>{"ch0", "ch1", "ch2"}));
  EXPECT_DOUBLE_EQ(rec.channel("ch1").samples[1], 5.0);
}

TEST(Csv, NonNumericCellCitesLine) {
  std::string text = "a,b\n";
  for (int i = 0; i < 5; ++i) text += "1,2\n";
  text += "1,oops\n";
  EXPECT_EQ(parse_error_line(text), 7u);
}

TEST(Csv, RaggedRowCitesLine) { EXPECT_EQ(parse_error_line("a,b\n1,2\n3\n"), 3u); }

TEST(Csv, MissingRequiredChannel) {
  std::istringstream in("a,b\n1,2\n");
  const std::vector<std::string> need = {"thoracic"};
  EXPECT_THROW(parse_csv(in, 1000.0, need), ParseError);
}

TEST(Csv, EmptyAndBadRate) {
  std::istringstream empty("");
  EXPECT_THROW(parse_csv(empty, 1000.0), ParseError);
  std::istringstream ok("1,2\n");
  EXPECT_THROW(parse_csv(ok, 0.0), ValidationError);
}

TEST(Csv, EightColumnMultichannelFile) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::ostringstream out;
  for (int r = 0; r < 2500; ++r) {
    for (int c = 0; c < 8; ++c) out << (c ? " " : "") << u(rng);
    out << '\n';
  }
  std::istringstream in(out.str());
  const auto rec = parse_csv(in, 250.0);
  EXPECT_EQ(rec.channels.size(), 8u);
  EXPECT_EQ(rec.length(), 2500u);
  EXPECT_TRUE(rec.has_channel("ch5"));
  EXPECT_FALSE(rec.has_channel("thoracic"));
  EXPECT_THROW(rec.channel("thoracic"), ValidationError);
}

TEST(Csv, RoundTripIsExact) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  Recording rec;
  rec.fs = 500.0;
  rec.channels = {{"x", {}}, {"y", {}}};
  for (int i = 0; i < 300; ++i) {
    rec.channels[0].samples.push_back(g(rng));
    rec.channels[1].samples.push_back(g(rng) * 1e-7);
  }
  std::stringstream buf;
  write_csv(buf, rec);
  const auto back = parse_csv(buf, 500.0);
  ASSERT_EQ(back.channels.size(), 2u);
  EXPECT_EQ(back.channels[0].samples, rec.channels[0].samples);
  EXPECT_EQ(back.channels[1].samples, rec.channels[1].samples);
}

TEST(Raw, RoundTripWithinQuantum) {
  Recording rec;
  rec.fs = 1000.0;
  rec.channels = {{"thoracic", {}}, {"abdominal", {}}};
  for (int i = 0; i < 1000; ++i) {
    rec.channels[0].samples.push_back(0.9 * std::sin(0.01 * i));
    rec.channels[1].samples.push_back(0.4 * std::cos(0.03 * i));
  }
  std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
  write_raw(buf, rec);
  const auto back = parse_raw(buf, 0.0);
  EXPECT_DOUBLE_EQ(back.fs, 1000.0);
  ASSERT_EQ(back.channel_names(), rec.channel_names());
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < rec.length(); ++i) {
      ASSERT_NEAR(back.channels[c].samples[i], rec.channels[c].samples[i], 0.5 / 32768.0 + 1e-12);
    }
  }
}

TEST(Raw, HeaderRateCanBeOverridden) {
  Recording rec;
  rec.fs = 1000.0;
  rec.channels = {{"a", {0.5, -0.5}}};
  std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
  write_raw(buf, rec);
  const auto back = parse_raw(buf, 250.0);
  EXPECT_DOUBLE_EQ(back.fs, 250.0);
  EXPECT_DOUBLE_EQ(back.channels[0].samples[0], 0.5);
}

TEST(Raw, RejectsBadMagicAndTruncation) {
  std::istringstream bad("NOTRAW00xxxxxxxx");
  EXPECT_THROW(parse_raw(bad, 0.0), ParseError);
  Recording rec;
  rec.fs = 1000.0;
  rec.channels = {{"a", {0.1, 0.2, 0.3}}};
  std::ostringstream out(std::ios::binary);
  write_raw(out, rec);
  std::string bytes = out.str();
  bytes.resize(bytes.size() - 1);
  std::istringstream cut(bytes);
  EXPECT_THROW(parse_raw(cut, 0.0), ParseError);
}

TEST(Format, Names) {
  EXPECT_EQ(format_from_name("raw"), Format::raw);
  EXPECT_EQ(format_from_name("csv"), Format::csv);
  EXPECT_THROW(format_from_name("edf"), std::invalid_argument);
  EXPECT_EQ(format_for_path("x/rec.raw"), Format::raw);
  EXPECT_EQ(format_for_path("rec.bin"), Format::raw);
  EXPECT_EQ(format_for_path("rec.txt"), Format::csv);
}

TEST(Annotations, ParsesBothClasses) {
  std::istringstream in("# fetal and maternal\n100,fetal\n250,maternal\n\n529,fetal\n958,fetal\n");
  const auto a = parse_annotations(in);
  EXPECT_EQ(a.fetal, (std::vector<std::size_t>{100, 529, 958}));
  EXPECT_EQ(a.maternal, (std::vector<std::size_t>{250}));
}

TEST(Annotations, EmptyFileWarns) {
  std::istringstream in("");
  std::vector<std::string> warnings;
  const auto a = parse_annotations(in, &warnings);
  EXPECT_TRUE(a.empty());
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(Annotations, OutOfOrderAndMalformed) {
  std::istringstream unordered("500,fetal\n100,fetal\n");
  EXPECT_THROW(parse_annotations(unordered), ValidationError);
  std::istringstream bad_class("5,twin\n");
  EXPECT_THROW(parse_annotations(bad_class), ParseError);
  std::istringstream bad_index("-5,fetal\n");
  EXPECT_THROW(parse_annotations(bad_index), ParseError);
}

TEST(Annotations, DuplicatesDropped) {
  std::istringstream in("100,fetal\n100,fetal\n200,fetal\n");
  EXPECT_EQ(parse_annotations(in).fetal, (std::vector<std::size_t>{100, 200}));
}

TEST(Annotations, RangeCheckAgainstLength) {
  Annotations a;
  a.fetal = {10, 20};
  EXPECT_NO_THROW(validate_annotations(a, 21));
  EXPECT_THROW(validate_annotations(a, 20), ValidationError);
}

TEST(Annotations, WriteThenParse) {
  Annotations a;
  a.fetal = {5, 700, 1200};
  a.maternal = {300, 1000};
  std::stringstream buf;
  write_annotations(buf, a);
  const auto back = parse_annotations(buf);
  EXPECT_EQ(back.fetal, a.fetal);
  EXPECT_EQ(back.maternal, a.maternal);
}

TEST(Recording, ValidateCatchesMismatch) {
  Recording rec;
  rec.fs = 100.0;
  rec.channels = {{"a", {1, 2}}, {"b", {1}}};
  EXPECT_THROW(rec.validate(), ValidationError);
  rec.channels[1].samples.push_back(2);
  EXPECT_NO_THROW(rec.validate());
  rec.channels[1].name = "a";
  EXPECT_THROW(rec.validate(), ValidationError);
}

TEST(Synth, DeterministicForSeed) {
  synth::SynthSpec s;
  s.duration_s = 5.0;
  const auto a = synth::generate(s);
  const auto b = synth::generate(s);
  EXPECT_EQ(a.channel("abdominal").samples, b.channel("abdominal").samples);
  EXPECT_EQ(a.annotations->fetal, b.annotations->fetal);
  s.seed = 2;
  const auto c = synth::generate(s);
  EXPECT_NE(a.channel("abdominal").samples, c.channel("abdominal").samples);
}

TEST(Synth, BeatCountMatchesRate) {
  synth::SynthSpec s;
  s.duration_s = 60.0;
  const auto rec = synth::generate(s);
  ASSERT_TRUE(rec.annotations);
  EXPECT_NEAR(static_cast<double>(rec.annotations->fetal.size()), 115.0, 1.0);
  EXPECT_NEAR(static_cast<double>(rec.annotations->maternal.size()), 80.0, 1.0);
  EXPECT_EQ(rec.length(), 60'000u);
  EXPECT_NO_THROW(rec.validate());
}

TEST(Synth, NoiselessApexesSitOnAnnotations) {
  synth::SynthSpec s;
  s.duration_s = 10.0;
  s.noise_rms = 0.0;
  s.baseline_amp = 0.0;
  s.powerline_amp = 0.0;
  const auto rec = synth::generate(s);
  const auto& th = rec.channel("thoracic").samples;
  for (std::size_t m : rec.annotations->maternal) EXPECT_NEAR(th[m], 1.0, 1e-12);
}

TEST(Synth, InvalidSpecRejected) {
  synth::SynthSpec s;
  s.fs = -1.0;
  EXPECT_THROW(synth::generate(s), ConfigError);
  s = {};
  s.fetal_bpm = 20.0;
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Synth, JsonRoundTripAndUnknownKey) {
  synth::SynthSpec s;
  s.fetal_bpm = 140.0;
  s.seed = 99;
  const nlohmann::json j = s;
  EXPECT_EQ(j.get<synth::SynthSpec>(), s);
  nlohmann::json bad = j;
  bad["bogus"] = 1;
  EXPECT_THROW(bad.get<synth::SynthSpec>(), ConfigError);
}

TEST(Files, LoadRecordingFromDisk) {
  const auto dir = std::filesystem::temp_directory_path() / "fecg_io_test";
  std::filesystem::create_directories(dir);
  synth::SynthSpec s;
  s.duration_s = 2.0;
  const auto rec = synth::generate(s);
  write_recording(dir / "r.raw", rec, Format::raw);
  write_recording(dir / "r.csv", rec, Format::csv);
  const auto raw = load_recording(dir / "r.raw", Format::raw, 0.0);
  const auto csv = load_recording(dir / "r.csv", Format::csv, 1000.0);
  EXPECT_EQ(raw.length(), rec.length());
  EXPECT_EQ(csv.channel("thoracic").samples, rec.channel("thoracic").samples);
  EXPECT_THROW(load_recording(dir / "missing.csv", Format::csv, 1000.0), ParseError);
  std::filesystem::remove_all(dir);
}
