#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "instobj/datagen.hpp"
#include "instobj/errors.hpp"
#include "instobj/hash.hpp"

namespace instobj {

namespace {

constexpr std::size_t kColumns = 21;

void append_fixed(std::string& out, double v) {
  char buf[64];
  const int n = std::snprintf(buf, sizeof buf, "%.6f", v);
  out.append(buf, static_cast<std::size_t>(n));
}

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

template <typename T>
T parse_number(std::string_view cell, std::size_t line, const char* column) {
  T value{};
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || cell.empty()) {
    throw ParseError(line, std::string("bad value '") + std::string(cell) + "' in column " + column);
  }
  return value;
}

}  // namespace

std::string format_dataset(const Dataset& dataset) {
  std::string out = kDatasetHeader;
  out += '\n';
  for (const auto& r : dataset.records) {
    out += std::to_string(r.face);
    out += ',';
    out += r.case_id;
    out += ',';
    out += std::to_string(r.sample_index);
    for (std::size_t c = 0; c < 3; ++c) {
      if (c < r.contacts.size()) {
        out += ',' + std::to_string(r.contacts[c].coord.x) + ',' +
               std::to_string(r.contacts[c].coord.y) + ',';
        append_fixed(out, r.contacts[c].force);
      } else {
        out += ",,,";
      }
    }
    for (double v : r.hall.values) {
      out += ',';
      append_fixed(out, v);
    }
    out += '\n';
  }
  return out;
}

Dataset parse_dataset(std::string_view text) {
  Dataset ds;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (!header_seen) {
      if (line != kDatasetHeader) throw ParseError(line_no, "unexpected header");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;

    const auto cells = split_row(line);
    if (cells.size() != kColumns) {
      throw ParseError(line_no, "row has " + std::to_string(cells.size()) + " columns, expected " +
                                    std::to_string(kColumns));
    }
    DatasetRecord r;
    r.face = parse_number<int>(cells[0], line_no, "face");
    r.case_id = std::string(cells[1]);
    if (r.case_id.empty()) throw ParseError(line_no, "empty case_id");
    r.sample_index = parse_number<int>(cells[2], line_no, "sample");
    bool absent_seen = false;
    for (std::size_t c = 0; c < 3; ++c) {
      const auto cx = cells[3 + 3 * c], cy = cells[4 + 3 * c], f = cells[5 + 3 * c];
      if (cx.empty() && cy.empty() && f.empty()) {
        absent_seen = true;
        continue;
      }
      if (absent_seen) throw ParseError(line_no, "contact listed after an empty contact slot");
      LabelledContact lc;
      lc.coord.x = parse_number<int>(cx, line_no, "cx");
      lc.coord.y = parse_number<int>(cy, line_no, "cy");
      lc.force = parse_number<double>(f, line_no, "f");
      r.contacts.push_back(lc);
    }
    r.hall.face_index = r.face;
    for (std::size_t k = 0; k < kSignalsPerFace; ++k) {
      r.hall.values[k] = parse_number<double>(cells[12 + k], line_no, "s");
    }
    ds.records.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError(1, "missing header");
  return ds;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << format_dataset(dataset);
  if (!out) throw Error("failed writing " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str());
}

std::uint64_t dataset_hash(const Dataset& dataset) { return fnv1a64(format_dataset(dataset)); }

}  // namespace instobj
