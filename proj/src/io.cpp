#include "alspce/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "alspce/reliability.hpp"

namespace alspce {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const std::string& context) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw std::runtime_error("bad numeric field '" + s + "' in " + context);
  return v;
}

std::vector<std::string> dataset_header(Eigen::Index m) {
  std::vector<std::string> h;
  for (Eigen::Index i = 1; i <= m; ++i) h.push_back("x_" + std::to_string(i));
  h.push_back("y");
  return h;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  return read_dataset_csv(in, path);
}

Dataset read_dataset_csv(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + name);
  const std::vector<std::string> header = split_csv(line);
  if (header.size() < 2 || header.back() != "y")
    throw std::runtime_error("dataset header must be x_1..x_M,y in " + name);
  const auto m = static_cast<Eigen::Index>(header.size() - 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (header[static_cast<std::size_t>(i)] != "x_" + std::to_string(i + 1))
      throw std::runtime_error("dataset header must be x_1..x_M,y in " + name);
  }

  std::vector<double> values;
  Eigen::Index rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv(line);
    if (static_cast<Eigen::Index>(fields.size()) != m + 1)
      throw std::runtime_error("wrong field count at line " + std::to_string(line_no) + " of " +
                               name);
    for (const auto& f : fields)
      values.push_back(parse_double(f, name + ":" + std::to_string(line_no)));
    ++rows;
  }
  if (rows == 0) throw std::runtime_error("dataset has no data rows: " + name);

  Dataset ds;
  ds.X.resize(rows, m);
  ds.y.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < m; ++c)
      ds.X(r, c) = values[static_cast<std::size_t>(r * (m + 1) + c)];
    ds.y[r] = values[static_cast<std::size_t>(r * (m + 1) + m)];
  }
  return ds;
}

void write_dataset_csv(const std::string& path, const Eigen::Ref<const Eigen::MatrixXd>& X,
                       const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (X.rows() != y.size()) throw std::invalid_argument("write_dataset_csv: row mismatch");
  std::ofstream out = open_out(path);
  const std::vector<std::string> header = dataset_header(X.cols());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    for (Eigen::Index c = 0; c < X.cols(); ++c) out << format_double(X(r, c)) << ",";
    out << format_double(y[r]) << "\n";
  }
}

void write_convergence_csv(const std::string& path,
                           const std::vector<AlIterationRecord>& history) {
  std::ofstream out = open_out(path);
  out << "n,sigma_eps,pf_raw,pf_smoothed,beta_smoothed\n";
  for (const auto& rec : history) {
    out << rec.n_ed << "," << format_double(rec.sigma_eps) << "," << format_double(rec.pf_raw)
        << "," << format_double(rec.pf_smoothed) << ","
        << format_double(beta_from_pf(rec.pf_smoothed)) << "\n";
  }
}

void write_ed_csv(const std::string& path, const AlState& state) {
  if (state.ed_inputs.rows() != state.ed_responses.size() ||
      state.ed_inputs.rows() != static_cast<Eigen::Index>(state.ed_iteration.size()))
    throw std::invalid_argument("write_ed_csv: inconsistent state");
  std::ofstream out = open_out(path);
  for (Eigen::Index c = 1; c <= state.ed_inputs.cols(); ++c) out << "x_" << c << ",";
  out << "y,iteration\n";
  for (Eigen::Index r = 0; r < state.ed_inputs.rows(); ++r) {
    for (Eigen::Index c = 0; c < state.ed_inputs.cols(); ++c)
      out << format_double(state.ed_inputs(r, c)) << ",";
    out << format_double(state.ed_responses[r]) << ","
        << state.ed_iteration[static_cast<std::size_t>(r)] << "\n";
  }
}

}  // namespace alspce
