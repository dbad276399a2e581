#include "deferlab/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"

#include "deferlab/errors.hpp"

namespace deferlab {

std::string format_double(double v) {
  char buf[64];
  const std::to_chars_result res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw IoError("failed to format a double");
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path);
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) throw IoError("cannot create directory for: " + path);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw IoError("cannot create directory: " + path);
}

std::string dataset_to_csv(const std::vector<Sample>& data) {
  if (data.empty()) throw EmptyDataError("cannot serialize an empty dataset");
  const std::size_t dim = data[0].x.size();
  std::ostringstream out;
  for (std::size_t i = 0; i < dim; ++i) out << "x_" << i << ",";
  out << "y,m\n";
  for (const Sample& s : data) {
    if (s.x.size() != dim) throw DimensionMismatchError("inconsistent feature dimensions");
    for (double v : s.x) out << format_double(v) << ",";
    out << s.y << ",";
    if (s.m.has_value()) out << *s.m;
    out << "\n";
  }
  return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double_field(const std::string& s, const char* what) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const std::from_chars_result res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw IoError(std::string("malformed ") + what + " field: '" + s + "'");
  }
  return v;
}

int parse_int_field(const std::string& s, const char* what) {
  int v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const std::from_chars_result res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw IoError(std::string("malformed ") + what + " field: '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<Sample> dataset_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw IoError("dataset CSV is empty");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 3 || header[header.size() - 2] != "y" || header.back() != "m") {
    throw IoError("dataset CSV header must be x_0,...,y,m");
  }
  const std::size_t dim = header.size() - 2;
  std::vector<Sample> data;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != dim + 2) throw IoError("dataset CSV row has the wrong arity");
    Sample s;
    s.x.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) s.x[i] = parse_double_field(fields[i], "feature");
    s.y = parse_int_field(fields[dim], "label");
    if (!fields[dim + 1].empty()) s.m = parse_int_field(fields[dim + 1], "expert");
    data.push_back(std::move(s));
  }
  if (data.empty()) throw IoError("dataset CSV has no rows");
  return data;
}

void write_dataset_csv(const std::string& path, const std::vector<Sample>& data) {
  write_text_file(path, dataset_to_csv(data));
}

std::vector<Sample> read_dataset_csv(const std::string& path) {
  return dataset_from_csv(read_text_file(path));
}

AtomicWorld atomic_world_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("world JSON parse error: ") + e.what());
  }
  AtomicWorld w;
  try {
    w.num_classes = j.at("num_classes").get<int>();
    w.points = j.at("points").get<std::vector<Vec>>();
    w.masses = j.at("masses").get<std::vector<double>>();
    w.label_dist = j.at("label_dist").get<std::vector<std::vector<double>>>();
    w.expert_dist = j.at("expert_dist").get<std::vector<std::vector<std::vector<double>>>>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("world JSON schema error: ") + e.what());
  }
  w.validate();
  return w;
}

std::string atomic_world_to_json(const AtomicWorld& world) {
  world.validate();
  nlohmann::json j;
  j["num_classes"] = world.num_classes;
  j["points"] = world.points;
  j["masses"] = world.masses;
  j["label_dist"] = world.label_dist;
  j["expert_dist"] = world.expert_dist;
  return j.dump(2) + "\n";
}

AtomicWorld load_atomic_world_json(const std::string& path) {
  return atomic_world_from_json(read_text_file(path));
}

}  // namespace deferlab
