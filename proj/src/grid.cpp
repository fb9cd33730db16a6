#include "spatsurv/grid.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "spatsurv/csv.hpp"
#include "spatsurv/rng.hpp"

namespace spatsurv {

void GridSpec::validate() const {
  if (rows < 2 || cols < 2)
    throw std::invalid_argument("grid: rows and cols must be at least 2");
  if (!(cell_side > 0.0))
    throw std::invalid_argument("grid: cell_side must be positive");
}

double SpatialWeights::total_weight() const {
  return std::accumulate(weight.begin(), weight.end(), 0.0);
}

SpatialWeights build_weight_matrix(const GridSpec& spec, Contiguity scheme,
                                   bool row_standardized) {
  spec.validate();
  const int m = spec.cell_count();
  SpatialWeights w;
  w.scheme = scheme;
  w.row_standardized = row_standardized;
  w.cells = m;
  w.row_offset.assign(m + 1, 0);
  w.neighbor.reserve(static_cast<std::size_t>(m) * (scheme == Contiguity::queen ? 8 : 4));

  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      const int cell = spec.index_of(r, c);
      const std::size_t begin = w.neighbor.size();
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          if (scheme == Contiguity::rook && dr != 0 && dc != 0) continue;
          const int nr = r + dr, nc = c + dc;
          if (nr < 0 || nr >= spec.rows || nc < 0 || nc >= spec.cols) continue;
          w.neighbor.push_back(spec.index_of(nr, nc));
        }
      }
      std::sort(w.neighbor.begin() + begin, w.neighbor.end());
      const std::size_t degree = w.neighbor.size() - begin;
      const double wij = row_standardized ? 1.0 / static_cast<double>(degree) : 1.0;
      w.weight.insert(w.weight.end(), degree, wij);
      w.row_offset[cell + 1] = static_cast<int>(w.neighbor.size());
    }
  }
  return w;
}

double morans_i(std::span<const double> values, const SpatialWeights& w) {
  const int m = w.cells;
  if (static_cast<int>(values.size()) != m)
    throw std::invalid_argument("morans_i: value count does not match weights");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(m);

  double denom = 0.0;
  for (double v : values) denom += (v - mean) * (v - mean);
  if (denom == 0.0)
    throw std::invalid_argument("Moran's I undefined for constant field");

  double num = 0.0;
  for (int i = 0; i < m; ++i) {
    const double di = values[i] - mean;
    for (int k = w.row_offset[i]; k < w.row_offset[i + 1]; ++k) {
      num += w.weight[k] * di * (values[w.neighbor[k]] - mean);
    }
  }
  return (static_cast<double>(m) / w.total_weight()) * num / denom;
}

PopulationGrid generate_population(const GridSpec& spec, double rho,
                                   std::int64_t total, std::uint64_t rng_seed) {
  spec.validate();
  if (!(rho >= 0.0 && rho < 1.0))
    throw std::invalid_argument("generate_population: rho must lie in [0, 1)");
  if (total <= 0)
    throw std::invalid_argument("generate_population: total must be positive");

  const int m = spec.cell_count();
  const SpatialWeights w = build_weight_matrix(spec, Contiguity::rook, true);

  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
  for (int i = 0; i < m; ++i) {
    for (int k = w.row_offset[i]; k < w.row_offset[i + 1]; ++k) {
      a(i, w.neighbor[k]) -= rho * w.weight[k];
    }
  }

  Rng rng(rng_seed);
  Eigen::VectorXd eps(m);
  for (int i = 0; i < m; ++i) eps(i) = rng.normal();

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const Eigen::VectorXd z = lu.solve(eps);
  // (I - rho W) is diagonally dominant for rho < 1 on row-standardized
  // weights, but guard against a bad factorization anyway.
  const double resid = (a * z - eps).norm();
  if (!(resid < 1e-6 * (1.0 + eps.norm())))
    throw std::runtime_error("generate_population: autoregressive system singular");

  // Multinomial allocation with weights proportional to exp(z).
  const double zmax = z.maxCoeff();
  std::vector<double> cum(m);
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    acc += std::exp(z(i) - zmax);
    cum[i] = acc;
  }

  PopulationGrid grid;
  grid.spec = spec;
  grid.rho = rho;
  grid.counts.assign(m, 0);
  grid.total = total;
  for (std::int64_t p = 0; p < total; ++p) {
    const double u = rng.uniform() * acc;
    const auto it = std::lower_bound(cum.begin(), cum.end(), u);
    const int cell = static_cast<int>(it - cum.begin());
    ++grid.counts[std::min(cell, m - 1)];
  }
  return grid;
}

void write_grid_csv(const PopulationGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "row,col,count\n";
  for (int r = 0; r < grid.spec.rows; ++r) {
    for (int c = 0; c < grid.spec.cols; ++c) {
      out << r << ',' << c << ',' << grid.counts[grid.spec.index_of(r, c)] << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace spatsurv
