#pragma once

#include "mqed/greens_jet.hpp"
#include "mqed/tensor.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mqed {

// How derivative blocks relate to d/dr (observation) and d/dr' (source).
//   split: d1_a = d/dr_a, d1_a_src = d/dr'_a, d2_ab = d/dr_a d/dr'_b.
//   total: d1_a = (d/dr_a + d/dr'_a) G(r, r), d2_ab the second total
//          derivative. The mixed block cannot be recovered from these.
enum class DerivativeSemantics { Total, Split };

struct GridAxes {
  // Strictly increasing coordinates, or a single entry for a fixed axis.
  std::array<std::vector<double>, 3> coords;
  std::array<bool, 3> fixed{false, false, false};

  std::size_t count(int a) const { return coords[a].size(); }
  std::size_t node_count() const { return count(0) * count(1) * count(2); }
  // Row-major, z fastest.
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return (i * count(1) + j) * count(2) + k;
  }
  Vec3 node(std::size_t flat) const;
  // Smallest spacing over the non-fixed axes (inf when none).
  double min_spacing() const;
};

using GridBlock = std::vector<ComplexTensor3x3>; // one 3x3 per node
using BlockMap = std::map<std::string, GridBlock>;

// Coincident-point Green data on a rectilinear grid. Entries are complex;
// only their imaginary parts are physical input (the real parts are carried
// for round-tripping). Raw values are kept exactly as read so that saving
// reproduces the file; si_* are the converted copies used for all math.
struct TensorGrid {
  double frequency = 0.0; // rad/s
  std::string length_unit = "m";
  int value_unit_exponent = 1;
  DerivativeSemantics semantics = DerivativeSemantics::Split;
  GridAxes raw_axes;
  GridAxes axes; // SI
  BlockMap raw_blocks;
  BlockMap blocks; // SI
  double symmetry_tol = 1e-6;
  double derivative_tol = 1e-2;
  std::string provenance_json = "{}"; // free-form metadata object, verbatim

  double length_scale() const; // metres per length_unit
  // Multiplier from file units to SI for a block whose derivative order is
  // `order` (0 value, 1 first, 2 second).
  double block_scale(int order) const;

  bool has_block(const std::string &key) const { return blocks.count(key) != 0; }
  bool has_first_derivatives() const;
  bool has_mixed_derivatives() const;
  // Stores an SI block and its raw counterpart.
  void set_block_si(const std::string &key, GridBlock data);
};

// Grid with SI units (length_unit "m") and no blocks.
TensorGrid make_grid(double frequency, const GridAxes &axes_si,
                     DerivativeSemantics semantics);

// Derivative order encoded in a block key ("value", "d1_x", "d2_xy_src", ...).
int block_order(const std::string &key);
std::vector<std::string> first_derivative_keys(DerivativeSemantics s);
std::vector<std::string> second_derivative_keys(DerivativeSemantics s);

TensorGrid load_grid(std::istream &in);
TensorGrid load_grid_file(const std::string &path);
void save_grid(const TensorGrid &grid, std::ostream &out);
std::string save_grid_string(const TensorGrid &grid);

// Multilinear interpolation of every block. The jet is ImaginaryOnly; its
// has_first / has_mixed flags report block availability.
GreensJet jet_at(const TensorGrid &grid, const Vec3 &point);

// Coincident-point field V(r) = Im G(r, r).
using PointSampler = std::function<RealTensor3x3(const Vec3 &)>;
// Two-point field Im G(r_obs, r_src).
using PairSampler = std::function<RealTensor3x3(const Vec3 &obs, const Vec3 &src)>;

struct FDOptions {
  double step = 0.0; // m
  bool parallel = true;
  int workers = 0; // 0: OpenMP default
};

// Central second-order stencils (one-sided second-order where a stencil
// would leave the extent of a non-fixed axis). Samplers must be thread-safe.
// PointSampler overload: total-semantics blocks d1_a and d2_ab (a <= b).
BlockMap finite_difference_blocks(const PointSampler &sampler, const GridAxes &axes,
                                  const FDOptions &opt);
// PairSampler overload: split-semantics blocks d1_a, d1_a_src and the nine
// mixed blocks d2_ab, evaluated at coincident nodes r = r'.
BlockMap finite_difference_blocks(const PairSampler &sampler, const GridAxes &axes,
                                  const FDOptions &opt);

struct GridCheck {
  std::string name;
  bool passed = false;
  double worst = 0.0;
  std::string detail;
};

struct GridValidationReport {
  std::vector<GridCheck> checks;
  bool all_passed() const;
};

GridValidationReport validate_grid(const TensorGrid &grid);

// Split-semantics grid of the homogeneous medium (index n): value block
// Im G(r, r) = k/(6 pi) and derivative blocks by finite differences of the
// two-point Im G. Test fixture and demo data.
TensorGrid sample_homogeneous_grid(double omega, double n, const GridAxes &axes_si,
                                   const FDOptions &opt);

} // namespace mqed
