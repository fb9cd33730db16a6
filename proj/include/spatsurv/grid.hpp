#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace spatsurv {

// Regular lattice of square cells, row-major indexing. Row 0 is the top
// row; centroids live at the cell centers in map units of cell_side.
struct GridSpec {
  int rows = 20;
  int cols = 20;
  double cell_side = 1.0;

  int cell_count() const { return rows * cols; }
  int index_of(int r, int c) const { return r * cols + c; }
  int row_of(int cell) const { return cell / cols; }
  int col_of(int cell) const { return cell % cols; }
  double centroid_x(int cell) const { return (col_of(cell) + 0.5) * cell_side; }
  double centroid_y(int cell) const { return (row_of(cell) + 0.5) * cell_side; }

  void validate() const;  // throws std::invalid_argument
};

enum class Contiguity { rook, queen };

// Sparse contiguity weights, CSR layout. The support is symmetric even when
// row standardization makes the values asymmetric.
struct SpatialWeights {
  Contiguity scheme = Contiguity::rook;
  bool row_standardized = true;
  int cells = 0;
  std::vector<int> row_offset;  // cells + 1
  std::vector<int> neighbor;
  std::vector<double> weight;

  double total_weight() const;  // S0
};

SpatialWeights build_weight_matrix(const GridSpec& spec, Contiguity scheme,
                                   bool row_standardized);

// Moran's I with the given weights. Throws std::invalid_argument on a
// constant field (zero variance) or a size mismatch.
double morans_i(std::span<const double> values, const SpatialWeights& w);

struct PopulationGrid {
  GridSpec spec;
  double rho = 0.0;  // autocorrelation level the field was generated at
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;
};

// Synthesize a population surface with tunable spatial autocorrelation:
// a simultaneous-autoregressive latent field z = (I - rho W)^-1 eps on
// row-standardized rook weights, exponentiated and used as multinomial
// allocation weights for `total` residents.
PopulationGrid generate_population(const GridSpec& spec, double rho,
                                   std::int64_t total, std::uint64_t rng_seed);

void write_grid_csv(const PopulationGrid& grid, const std::string& path);

}  // namespace spatsurv
