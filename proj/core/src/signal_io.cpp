#include "fecg/signal_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <type_traits>

#include "fecg/error.hpp"

namespace fecg::io {
namespace {

constexpr std::string_view kRawMagic = "FECGRAW1";
constexpr double kInt16Scale = 32768.0;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  if (line.find(',') != std::string_view::npos) {
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(trim(line.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return cells;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    cells.push_back(line.substr(i, j - i));
    i = j;
  }
  return cells;
}

std::optional<double> parse_number(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

void check_required(const Recording& rec, std::span<const std::string> required) {
  for (const auto& name : required) {
    if (!rec.has_channel(name)) {
      std::string have;
      for (const auto& c : rec.channels) have += (have.empty() ? "" : ", ") + c.name;
      throw ParseError("missing channel '" + name + "' (available: " + have + ")", 1);
    }
  }
}

void check_fs(double fs) {
  if (!(fs > 0.0) || !std::isfinite(fs)) throw ValidationError("sampling rate must be positive");
}

template <class T>
T read_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(T)> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), b.size())) {
    throw ParseError(std::string("truncated raw file while reading ") + what);
  }
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < b.size(); ++i) v |= std::uint64_t{b[i]} << (8 * i);
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(v);
  } else {
    return static_cast<T>(v);
  }
}

template <class T>
void write_le(std::ostream& out, T value) {
  std::uint64_t v = 0;
  if constexpr (std::is_same_v<T, double>) {
    v = std::bit_cast<std::uint64_t>(value);
  } else {
    v = static_cast<std::uint64_t>(static_cast<std::make_unsigned_t<T>>(value));
  }
  std::array<char, sizeof(T)> b{};
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(b.data(), b.size());
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

bool Recording::has_channel(std::string_view name) const {
  return std::any_of(channels.begin(), channels.end(), [&](const Channel& c) { return c.name == name; });
}

const Channel& Recording::channel(std::string_view name) const {
  for (const auto& c : channels) {
    if (c.name == name) return c;
  }
  throw ValidationError("no channel named '" + std::string(name) + "'");
}

std::vector<std::string> Recording::channel_names() const {
  std::vector<std::string> out;
  for (const auto& c : channels) out.push_back(c.name);
  return out;
}

void Recording::validate() const {
  check_fs(fs);
  if (channels.empty()) throw ValidationError("recording has no channels");
  std::set<std::string> names;
  for (const auto& c : channels) {
    if (c.samples.size() != length()) throw ValidationError("channel '" + c.name + "' length differs");
    if (!names.insert(c.name).second) throw ValidationError("duplicate channel '" + c.name + "'");
  }
  if (annotations) validate_annotations(*annotations, length());
}

Format format_from_name(std::string_view name) {
  if (name == "csv") return Format::csv;
  if (name == "raw") return Format::raw;
  throw std::invalid_argument("recording format must be 'csv' or 'raw'");
}

std::string_view to_string(Format f) { return f == Format::csv ? "csv" : "raw"; }

Format format_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".raw" || ext == ".bin") ? Format::raw : Format::csv;
}

Recording parse_csv(std::istream& in, double fs, std::span<const std::string> required) {
  check_fs(fs);
  Recording rec;
  rec.fs = fs;
  std::string line;
  std::size_t lineno = 0;
  std::size_t data_rows = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    const auto cells = split_cells(content);

    std::vector<double> values;
    values.reserve(cells.size());
    std::optional<std::size_t> bad;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto v = parse_number(cells[i]);
      if (!v) {
        if (!bad) bad = i;
        continue;
      }
      values.push_back(*v);
    }

    if (first) {
      first = false;
      if (bad) {
        for (const auto& cell : cells) {
          if (cell.empty()) throw ParseError("empty channel name in header", lineno);
          rec.channels.push_back({std::string(cell), {}});
        }
        continue;
      }
      for (std::size_t i = 0; i < cells.size(); ++i) rec.channels.push_back({"ch" + std::to_string(i), {}});
    }
    if (cells.size() != rec.channels.size()) {
      throw ParseError("expected " + std::to_string(rec.channels.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       lineno);
    }
    if (bad) {
      throw ParseError("non-numeric cell '" + std::string(cells[*bad]) + "' in column " +
                           std::to_string(*bad + 1),
                       lineno);
    }
    for (std::size_t i = 0; i < values.size(); ++i) rec.channels[i].samples.push_back(values[i]);
    ++data_rows;
  }
  if (rec.channels.empty() || data_rows == 0) throw ParseError("no data rows", lineno);
  check_required(rec, required);
  rec.validate();
  return rec;
}

Recording parse_raw(std::istream& in, double fs, std::span<const std::string> required) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) ||
      std::string_view(magic.data(), magic.size()) != kRawMagic) {
    throw ParseError("not a raw recording (bad magic)");
  }
  const auto nchan = read_le<std::uint32_t>(in, "channel count");
  const auto nsamp = read_le<std::uint32_t>(in, "sample count");
  const double header_fs = read_le<double>(in, "sampling rate");
  if (nchan == 0) throw ParseError("raw recording declares no channels");

  Recording rec;
  rec.fs = fs > 0.0 ? fs : header_fs;
  for (std::uint32_t c = 0; c < nchan; ++c) {
    const auto len = read_le<std::uint16_t>(in, "channel name length");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw ParseError("truncated raw file while reading channel name");
    rec.channels.push_back({name.empty() ? "ch" + std::to_string(c) : name, {}});
    rec.channels.back().samples.reserve(nsamp);
  }
  for (std::uint32_t n = 0; n < nsamp; ++n) {
    for (auto& ch : rec.channels) {
      ch.samples.push_back(static_cast<double>(read_le<std::int16_t>(in, "samples")) / kInt16Scale);
    }
  }
  check_required(rec, required);
  rec.validate();
  return rec;
}

Recording load_recording(const std::filesystem::path& path, Format format, double fs,
                         std::span<const std::string> required) {
  Recording rec;
  if (format == Format::csv) {
    auto in = open_in(path, std::ios::in);
    rec = parse_csv(in, fs, required);
  } else {
    auto in = open_in(path, std::ios::in | std::ios::binary);
    rec = parse_raw(in, fs, required);
  }
  rec.provenance = path.string();
  return rec;
}

void write_csv(std::ostream& out, const Recording& rec) {
  rec.validate();
  for (std::size_t c = 0; c < rec.channels.size(); ++c) {
    out << (c ? "," : "") << rec.channels[c].name;
  }
  out << '\n';
  std::array<char, 32> buf{};
  for (std::size_t n = 0; n < rec.length(); ++n) {
    for (std::size_t c = 0; c < rec.channels.size(); ++c) {
      const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), rec.channels[c].samples[n]);
      if (c) out << ',';
      out.write(buf.data(), r.ptr - buf.data());
    }
    out << '\n';
  }
}

void write_raw(std::ostream& out, const Recording& rec) {
  rec.validate();
  out.write(kRawMagic.data(), static_cast<std::streamsize>(kRawMagic.size()));
  write_le(out, static_cast<std::uint32_t>(rec.channels.size()));
  write_le(out, static_cast<std::uint32_t>(rec.length()));
  write_le(out, rec.fs);
  for (const auto& ch : rec.channels) {
    if (ch.name.size() > 0xffff) throw ValidationError("channel name too long for raw format");
    write_le(out, static_cast<std::uint16_t>(ch.name.size()));
    out.write(ch.name.data(), static_cast<std::streamsize>(ch.name.size()));
  }
  for (std::size_t n = 0; n < rec.length(); ++n) {
    for (const auto& ch : rec.channels) {
      const double q = std::clamp(std::round(ch.samples[n] * kInt16Scale), -32768.0, 32767.0);
      write_le(out, static_cast<std::int16_t>(q));
    }
  }
}

void write_recording(const std::filesystem::path& path, const Recording& rec, Format format) {
  std::ofstream out(path, format == Format::raw ? std::ios::out | std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  if (format == Format::csv) {
    write_csv(out, rec);
  } else {
    write_raw(out, rec);
  }
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

Annotations parse_annotations(std::istream& in, std::vector<std::string>* warnings) {
  Annotations ann;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    const auto cells = split_cells(content);
    if (cells.size() != 2) throw ParseError("expected '<index>,<fetal|maternal>'", lineno);
    std::size_t index = 0;
    const auto [ptr, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), index);
    if (ec != std::errc{} || ptr != cells[0].data() + cells[0].size()) {
      throw ParseError("malformed index '" + std::string(cells[0]) + "'", lineno);
    }
    std::vector<std::size_t>* target = nullptr;
    if (cells[1] == "fetal") {
      target = &ann.fetal;
    } else if (cells[1] == "maternal") {
      target = &ann.maternal;
    } else {
      throw ParseError("unknown annotation class '" + std::string(cells[1]) + "'", lineno);
    }
    if (!target->empty()) {
      if (index < target->back()) {
        throw ValidationError("annotation indices out of order at line " + std::to_string(lineno));
      }
      if (index == target->back()) continue;
    }
    target->push_back(index);
  }
  if (ann.empty() && warnings) warnings->emplace_back("annotation file contains no entries");
  return ann;
}

Annotations load_annotations(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  auto in = open_in(path, std::ios::in);
  return parse_annotations(in, warnings);
}

void write_annotations(std::ostream& out, const Annotations& ann) {
  // Merged by index so the file reads in time order.
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < ann.fetal.size() || j < ann.maternal.size()) {
    if (j >= ann.maternal.size() || (i < ann.fetal.size() && ann.fetal[i] <= ann.maternal[j])) {
      out << ann.fetal[i++] << ",fetal\n";
    } else {
      out << ann.maternal[j++] << ",maternal\n";
    }
  }
}

void validate_annotations(const Annotations& ann, std::size_t length) {
  auto check = [&](const std::vector<std::size_t>& v, const char* what) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (v[k] >= length) {
        throw ValidationError(std::string(what) + " annotation " + std::to_string(v[k]) +
                              " outside recording of " + std::to_string(length) + " samples");
      }
      if (k && v[k] <= v[k - 1]) throw ValidationError(std::string(what) + " annotations not increasing");
    }
  };
  check(ann.fetal, "fetal");
  check(ann.maternal, "maternal");
}

}  // namespace fecg::io
