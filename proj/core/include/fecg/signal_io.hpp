#pragma once

// Recordings, annotation files and the two on-disk recording formats.
//
// CSV: optional header row of channel names, one sample per row, cells
// separated by commas or whitespace. Files without a header get channel
// names ch0, ch1, ...
//
// Raw: "FECGRAW1", u32 channel count, u32 sample count, f64 fs, then for
// each channel a u16 name length and the name bytes, then interleaved
// little-endian int16 samples. Samples are rescaled by 1/32768 on load.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fecg::io {

struct Channel {
  std::string name;
  std::vector<double> samples;
};

struct Annotations {
  std::vector<std::size_t> fetal;
  std::vector<std::size_t> maternal;

  bool empty() const { return fetal.empty() && maternal.empty(); }
};

struct Recording {
  std::vector<Channel> channels;
  double fs = 0.0;
  std::optional<Annotations> annotations;
  std::string provenance;

  std::size_t length() const { return channels.empty() ? 0 : channels.front().samples.size(); }
  bool has_channel(std::string_view name) const;
  /// Throws ValidationError when no channel has this name.
  const Channel& channel(std::string_view name) const;
  std::vector<std::string> channel_names() const;
  /// Equal channel lengths, fs > 0, unique names, annotations in range.
  void validate() const;
};

enum class Format { csv, raw };

Format format_from_name(std::string_view name);
std::string_view to_string(Format f);
/// ".raw" / ".bin" map to raw, anything else to CSV.
Format format_for_path(const std::filesystem::path& path);

/// `required` names channels that must be present (ParseError otherwise).
Recording parse_csv(std::istream& in, double fs, std::span<const std::string> required = {});
Recording parse_raw(std::istream& in, double fs, std::span<const std::string> required = {});

/// For raw files a positive `fs` overrides the rate stored in the header.
Recording load_recording(const std::filesystem::path& path, Format format, double fs,
                         std::span<const std::string> required = {});

void write_csv(std::ostream& out, const Recording& rec);
void write_raw(std::ostream& out, const Recording& rec);
void write_recording(const std::filesystem::path& path, const Recording& rec, Format format);

/// Lines of `<index>,<fetal|maternal>`; blank lines and `#` comments are
/// skipped. Each class must be non-decreasing; duplicates are dropped.
/// An empty file yields empty sets and a warning.
Annotations parse_annotations(std::istream& in, std::vector<std::string>* warnings = nullptr);
Annotations load_annotations(const std::filesystem::path& path,
                             std::vector<std::string>* warnings = nullptr);
void write_annotations(std::ostream& out, const Annotations& ann);

/// Throws ValidationError for an index >= length.
void validate_annotations(const Annotations& ann, std::size_t length);

}  // namespace fecg::io
