#include "ballet/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "ballet/errors.hpp"

namespace ballet::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_double(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || end != field.data() + field.size() || field.empty()) {
    throw IoError("line " + std::to_string(line) + ": cannot parse number '" +
                  std::string(field) + "'");
  }
  if (!std::isfinite(v)) {
    throw NumericError("line " + std::to_string(line) + ": non-finite value");
  }
  return v;
}

// Calls f(line_number, fields) for every non-blank line.
template <class F>
void for_each_row(const std::string& text, F&& f) {
  std::size_t line = 0;
  std::size_t pos = 0;
  std::vector<std::string_view> fields;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line;
    const std::string_view row = trim(std::string_view(text).substr(pos, end - pos));
    pos = end + 1;
    if (row.empty()) continue;
    fields.clear();
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = row.find(',', start);
      if (comma == std::string_view::npos) {
        fields.push_back(row.substr(start));
        break;
      }
      fields.push_back(row.substr(start, comma - start));
      start = comma + 1;
    }
    f(line, fields);
  }
}

void put_le(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) {
    out.push_back(static_cast<char>(bits & 0xffu));
    bits >>= 8;
  }
}

double get_le(const char* p) {
  std::uint64_t bits = 0;
  for (int b = 7; b >= 0; --b) {
    bits = (bits << 8) | static_cast<unsigned char>(p[b]);
  }
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("error writing " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move output into place at " + path.string());
}

std::string format_double(double x) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw NumericError("cannot format number");
  return std::string(buf, end);
}

PointSet parse_points_csv(const std::string& text, bool header) {
  std::size_t dim = 0;
  std::vector<double> coords;
  bool skip = header;
  for_each_row(text, [&](std::size_t line, const std::vector<std::string_view>& fields) {
    if (skip) {
      skip = false;
      return;
    }
    if (dim == 0) dim = fields.size();
    if (fields.size() != dim) {
      throw IoError("line " + std::to_string(line) + ": expected " + std::to_string(dim) +
                    " columns, found " + std::to_string(fields.size()));
    }
    for (auto f : fields) coords.push_back(parse_double(f, line));
  });
  if (dim == 0) throw IoError("no points in input");
  return PointSet(dim, std::move(coords));
}

PointSet read_points_csv(const std::filesystem::path& path, bool header) {
  return parse_points_csv(read_text(path), header);
}

std::string points_to_csv(const PointSet& points) {
  std::string out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto row = points[i];
    for (std::size_t a = 0; a < row.size(); ++a) {
      if (a) out.push_back(',');
      out += format_double(row[a]);
    }
    out.push_back('\n');
  }
  return out;
}

std::vector<double> read_density_csv(const std::filesystem::path& path) {
  std::vector<double> out;
  for_each_row(read_text(path), [&](std::size_t line, const std::vector<std::string_view>& f) {
    if (f.size() != 1) {
      throw IoError("line " + std::to_string(line) + ": density files have one column");
    }
    out.push_back(parse_double(f[0], line));
  });
  return out;
}

std::string ensemble_to_binary(const DensityDrawEnsemble& ensemble) {
  const nlohmann::json header = {{"format", kEnsembleFormat},
                                 {"version", 1},
                                 {"S", ensemble.num_draws()},
                                 {"n", ensemble.size()},
                                 {"dtype", "float64-le"}};
  std::string out = header.dump();
  out.push_back('\n');
  out.reserve(out.size() + 8 * ensemble.values().size());
  for (double v : ensemble.values()) put_le(out, v);
  return out;
}

DensityDrawEnsemble parse_ensemble_binary(const std::string& bytes) {
  const std::size_t nl = bytes.find('\n');
  if (nl == std::string::npos) throw IoError("ensemble header line is missing");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, nl));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad ensemble header: ") + e.what());
  }
  if (!header.is_object() || !header.contains("S") || !header.contains("n")) {
    throw IoError("ensemble header needs S and n");
  }
  if (header.contains("format") && header["format"] != kEnsembleFormat) {
    throw IoError("unknown ensemble format");
  }
  if (header.contains("dtype") && header["dtype"] != "float64-le") {
    throw IoError("unsupported ensemble dtype");
  }
  const auto S = header["S"].get<std::size_t>();
  const auto n = header["n"].get<std::size_t>();
  const std::size_t payload = bytes.size() - nl - 1;
  if (S != 0 && n > payload / 8 / S) throw IoError("ensemble payload is truncated");
  if (payload != 8 * S * n) {
    throw IoError("ensemble payload has " + std::to_string(payload) + " bytes, expected " +
                  std::to_string(8 * S * n));
  }
  std::vector<double> values(S * n);
  const char* p = bytes.data() + nl + 1;
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = get_le(p + 8 * i);
  return DensityDrawEnsemble(S, n, std::move(values));
}

std::string ensemble_to_csv(const DensityDrawEnsemble& ensemble) {
  std::string out;
  for (std::size_t s = 0; s < ensemble.num_draws(); ++s) {
    const auto row = ensemble.row(s);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out.push_back(',');
      out += format_double(row[i]);
    }
    out.push_back('\n');
  }
  return out;
}

DensityDrawEnsemble parse_ensemble_csv(const std::string& text) {
  std::size_t n = 0, S = 0;
  std::vector<double> values;
  for_each_row(text, [&](std::size_t line, const std::vector<std::string_view>& fields) {
    if (S == 0) n = fields.size();
    if (fields.size() != n) {
      throw AlignmentError("line " + std::to_string(line) + ": draw has " +
                           std::to_string(fields.size()) + " values, expected " +
                           std::to_string(n));
    }
    for (auto f : fields) values.push_back(parse_double(f, line));
    ++S;
  });
  if (S == 0) throw IoError("ensemble file has no draws");
  return DensityDrawEnsemble(S, n, std::move(values));
}

DensityDrawEnsemble read_ensemble(const std::filesystem::path& path) {
  const std::string bytes = read_text(path);
  if (!bytes.empty() && bytes.front() == '{') return parse_ensemble_binary(bytes);
  return parse_ensemble_csv(bytes);
}

void write_ensemble(const std::filesystem::path& path, const DensityDrawEnsemble& ensemble) {
  if (path.extension() == ".csv") {
    write_text(path, ensemble_to_csv(ensemble));
  } else {
    write_text(path, ensemble_to_binary(ensemble));
  }
}

std::string partition_to_json(const SubPartition& c) {
  std::string out = "{\"n\": " + std::to_string(c.size()) + ", \"labels\": [";
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(c[i]);
  }
  out += "]}\n";
  return out;
}

SubPartition partition_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad partition JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("labels") || !j["labels"].is_array()) {
    throw IoError("partition JSON needs a labels array");
  }
  std::vector<Label> labels;
  labels.reserve(j["labels"].size());
  for (const auto& v : j["labels"]) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw IoError("partition labels must be non-negative integers");
    }
    labels.push_back(v.get<Label>());
  }
  if (j.contains("n") && j["n"].get<std::size_t>() != labels.size()) {
    throw AlignmentError("partition n does not match the number of labels");
  }
  return SubPartition(std::move(labels));
}

std::string partition_to_csv(const SubPartition& c) {
  std::string out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    out += std::to_string(c[i]);
    out.push_back('\n');
  }
  return out;
}

SubPartition partition_from_csv(const std::string& text) {
  std::vector<Label> labels;
  for_each_row(text, [&](std::size_t line, const std::vector<std::string_view>& f) {
    Label v = -1;
    const auto s = trim(f[0]);
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (f.size() != 1 || ec != std::errc() || end != s.data() + s.size() || v < 0) {
      throw IoError("line " + std::to_string(line) + ": expected one non-negative label");
    }
    labels.push_back(v);
  });
  return SubPartition(std::move(labels));
}

SubPartition read_partition(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return partition_from_json(text);
  return partition_from_csv(text);
}

}  // namespace ballet::io
