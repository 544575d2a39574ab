#include "liefm/trajectory_io.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>

namespace liefm {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string::npos ? pos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_field(const std::string& text, const char* column, long line) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(std::string("cannot parse ") + column + " value '" + text + "'", line);
  }
  return value;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string trajectory_header(const Group& group) {
  std::string header = "sample_id,step,t";
  for (const auto& name : group.coordinate_names()) header += "," + name;
  return header;
}

void write_trajectories(std::ostream& out, const Group& group,
                        const std::vector<std::vector<GroupElement>>& trajectories) {
  out << trajectory_header(group) << '\n';
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const auto& traj = trajectories[i];
    const std::size_t steps = traj.size() > 1 ? traj.size() - 1 : 1;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      group.check_element(traj[k], "write_trajectories");
      out << i << ',' << k << ',' << format_double(static_cast<double>(k) / static_cast<double>(steps));
      for (Eigen::Index c = 0; c < traj[k].payload.size(); ++c) out << ',' << format_double(traj[k].payload[c]);
      out << '\n';
    }
  }
}

std::vector<TrajectoryRow> read_trajectories(std::istream& in, const Group& group) {
  std::string line;
  long line_no = 1;
  if (!std::getline(in, line)) throw ParseError("empty trajectory file", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::string expected = trajectory_header(group);
  if (line != expected) throw ParseError("expected header '" + expected + "', got '" + line + "'", 1);

  const std::size_t columns = 3 + static_cast<std::size_t>(group.payload_size());
  std::vector<TrajectoryRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != columns) {
      throw ParseError("expected " + std::to_string(columns) + " columns, got " + std::to_string(fields.size()),
                       line_no);
    }
    TrajectoryRow row;
    row.sample_id = parse_field<long>(fields[0], "sample_id", line_no);
    row.step = parse_field<long>(fields[1], "step", line_no);
    row.t = parse_field<double>(fields[2], "t", line_no);
    row.element.payload.resize(group.payload_size());
    for (int c = 0; c < group.payload_size(); ++c) {
      row.element.payload[c] = parse_field<double>(fields[3 + static_cast<std::size_t>(c)], "coordinate", line_no);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

SampleBatch trajectory_endpoints(const std::vector<TrajectoryRow>& rows) {
  std::map<long, const TrajectoryRow*> last;
  for (const auto& row : rows) {
    auto& slot = last[row.sample_id];
    if (!slot || row.step > slot->step) slot = &row;
  }
  SampleBatch out;
  for (const auto& [id, row] : last) {
    out.elements.push_back(row->element);
    out.times.push_back(row->t);
  }
  return out;
}

}  // namespace liefm
