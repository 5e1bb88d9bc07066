#include "fibered/io.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fibered {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".json");
  return p;
}

void write_grid_measure(const std::filesystem::path& csv_path, const GridMeasure& mu) {
  const auto& g = mu.grid();
  {
    CsvWriter csv(csv_path, {"i", "j", "x", "theta", "rho"});
    for (int i = 0; i < g.n_x(); ++i) {
      for (int j = 0; j < g.n_theta(); ++j) {
        csv.cell(i).cell(j).cell(g.torus.site(i)).cell(g.theta.center(j)).cell(mu.rho(i, j));
        csv.end_row();
      }
    }
  }
  nlohmann::json meta = {{"n_x", g.n_x()},
                         {"n_theta", g.n_theta()},
                         {"theta_min", g.theta.theta_min},
                         {"theta_max", g.theta.theta_max}};
  std::ofstream side(sidecar_path(csv_path));
  if (!side) throw std::runtime_error("io: cannot write " + sidecar_path(csv_path).string());
  side << meta.dump(2) << "\n";
}

GridMeasure read_grid_measure(const std::filesystem::path& csv_path, double tol) {
  std::ifstream side(sidecar_path(csv_path));
  if (!side) throw std::runtime_error("io: missing sidecar " + sidecar_path(csv_path).string());
  const auto meta = nlohmann::json::parse(side);
  Grid grid{TorusGrid(meta.at("n_x").get<int>()),
            ThetaGrid(meta.at("theta_min").get<double>(), meta.at("theta_max").get<double>(),
                      meta.at("n_theta").get<int>())};

  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("io: cannot read " + csv_path.string());
  std::string line;
  std::getline(in, line);
  if (line != "i,j,x,theta,rho") throw std::runtime_error("io: unexpected header in " + csv_path.string());

  std::vector<double> rho(grid.size(), 0.0);
  std::vector<char> seen(grid.size(), 0);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    int i = 0, j = 0;
    double x = 0, t = 0, r = 0;
    char c = 0;
    if (!(ss >> i >> c >> j >> c >> x >> c >> t >> c >> r)) {
      throw std::runtime_error("io: malformed row '" + line + "'");
    }
    if (i < 0 || i >= grid.n_x() || j < 0 || j >= grid.n_theta()) {
      throw std::runtime_error("io: cell index out of range in '" + line + "'");
    }
    const auto k = static_cast<std::size_t>(i) * static_cast<std::size_t>(grid.n_theta()) +
                   static_cast<std::size_t>(j);
    rho[k] = r;
    seen[k] = 1;
  }
  for (char s : seen) {
    if (!s) throw std::runtime_error("io: missing cells in " + csv_path.string());
  }
  return GridMeasure(grid, std::move(rho), tol);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string> header)
    : CsvWriter(path, std::vector<std::string>(header)) {}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path) {
  if (!out_) throw std::runtime_error("io: cannot write " + path.string());
  for (const auto& h : header) cell(h);
  end_row();
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_real(v)); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::to_string(v)); }

CsvWriter& CsvWriter::cell(const std::string& s) {
  if (!first_) out_ << ',';
  out_ << s;
  first_ = false;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

}  // namespace fibered
