#include "mqed/greens_grid.hpp"
#include "mqed/constants.hpp"
#include "mqed/errors.hpp"
#include "mqed/greens_homogeneous.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace mqed {

using nlohmann::json;

namespace {

constexpr const char *kAxisNames[3] = {"x", "y", "z"};

std::string axis_key(int a) { return kAxisNames[a]; }

} // namespace

Vec3 GridAxes::node(std::size_t flat) const {
  const std::size_t k = flat % count(2);
  const std::size_t j = (flat / count(2)) % count(1);
  const std::size_t i = flat / (count(2) * count(1));
  return {coords[0][i], coords[1][j], coords[2][k]};
}

double GridAxes::min_spacing() const {
  double h = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a)
    for (std::size_t i = 1; i < coords[a].size(); ++i)
      h = std::min(h, coords[a][i] - coords[a][i - 1]);
  return h;
}

double TensorGrid::length_scale() const {
  if (length_unit == "nm")
    return 1e-9;
  if (length_unit == "um")
    return 1e-6;
  if (length_unit == "m")
    return 1.0;
  throw InputError("unknown length_unit '" + length_unit + "' (expected nm, um, m)");
}

double TensorGrid::block_scale(int order) const {
  // Block in length_unit^-(exponent + order); SI value = raw / L^(exponent+order).
  return std::pow(length_scale(), -(value_unit_exponent + order));
}

int block_order(const std::string &key) {
  if (key == "value")
    return 0;
  if (key.rfind("d1_", 0) == 0)
    return 1;
  if (key.rfind("d2_", 0) == 0)
    return 2;
  throw InputError("unknown block key '" + key + "'");
}

std::vector<std::string> first_derivative_keys(DerivativeSemantics s) {
  std::vector<std::string> out;
  for (int a = 0; a < 3; ++a)
    out.push_back("d1_" + axis_key(a));
  if (s == DerivativeSemantics::Split)
    for (int a = 0; a < 3; ++a)
      out.push_back("d1_" + axis_key(a) + "_src");
  return out;
}

std::vector<std::string> second_derivative_keys(DerivativeSemantics s) {
  std::vector<std::string> out;
  for (int a = 0; a < 3; ++a)
    for (int b = (s == DerivativeSemantics::Total ? a : 0); b < 3; ++b)
      out.push_back("d2_" + axis_key(a) + axis_key(b));
  return out;
}

bool TensorGrid::has_first_derivatives() const {
  for (const auto &k : first_derivative_keys(semantics))
    if (!has_block(k))
      return false;
  return true;
}

bool TensorGrid::has_mixed_derivatives() const {
  if (semantics == DerivativeSemantics::Total)
    return false;
  for (const auto &k : second_derivative_keys(semantics))
    if (!has_block(k))
      return false;
  return true;
}

void TensorGrid::set_block_si(const std::string &key, GridBlock data) {
  if (data.size() != axes.node_count())
    throw InputError("block '" + key + "' has " + std::to_string(data.size()) +
                     " nodes, grid has " + std::to_string(axes.node_count()));
  const double s = block_scale(block_order(key));
  GridBlock raw = data;
  for (auto &t : raw)
    for (auto &x : t.data)
      x /= s;
  raw_blocks[key] = std::move(raw);
  blocks[key] = std::move(data);
}

namespace {

void check_axes(const GridAxes &ax, const std::string &where) {
  for (int a = 0; a < 3; ++a) {
    const auto &c = ax.coords[a];
    if (c.empty())
      throw InputError(where + "axes." + axis_key(a) + ": empty axis");
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (!std::isfinite(c[i]))
        throw InputError(where + "axes." + axis_key(a) + "[" + std::to_string(i) +
                         "]: non-finite coordinate");
      if (i > 0 && !(c[i] > c[i - 1]))
        throw InputError(where + "axes." + axis_key(a) + "[" + std::to_string(i) +
                         "]: coordinates not strictly increasing");
    }
    if (ax.fixed[a] && c.size() != 1)
      throw InputError(where + "axes." + axis_key(a) + ": fixed axis must be a scalar");
  }
}

} // namespace

TensorGrid make_grid(double frequency, const GridAxes &axes_si,
                     DerivativeSemantics semantics) {
  check_axes(axes_si, "");
  TensorGrid g;
  g.frequency = frequency;
  g.length_unit = "m";
  g.value_unit_exponent = 1;
  g.semantics = semantics;
  g.axes = axes_si;
  g.raw_axes = axes_si;
  return g;
}

// ---------------------------------------------------------------- loading

namespace {

const json &require(const json &obj, const char *key, const std::string &where) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw InputError(where + ": missing required key '" + key + "'");
  return *it;
}

double as_number(const json &j, const std::string &where) {
  if (!j.is_number())
    throw InputError(where + ": expected a number");
  return j.get<double>();
}

ComplexTensor3x3 parse_tensor(const json &j, const std::string &where) {
  if (!j.is_array() || j.size() != 3)
    throw InputError(where + ": expected a 3x3 array");
  ComplexTensor3x3 t;
  for (int r = 0; r < 3; ++r) {
    const json &row = j[r];
    const std::string rw = where + "[" + std::to_string(r) + "]";
    if (!row.is_array() || row.size() != 3)
      throw InputError(rw + ": expected a row of 3 entries");
    for (int c = 0; c < 3; ++c) {
      const json &e = row[c];
      const std::string ew = rw + "[" + std::to_string(c) + "]";
      if (!e.is_array() || e.size() != 2)
        throw InputError(ew + ": expected [re, im]");
      t(r, c) = cplx(as_number(e[0], ew + "[0]"), as_number(e[1], ew + "[1]"));
      if (!std::isfinite(t(r, c).real()) || !std::isfinite(t(r, c).imag()))
        throw InputError(ew + ": non-finite entry");
    }
  }
  return t;
}

bool valid_block_key(const std::string &key, DerivativeSemantics s) {
  if (key == "value")
    return true;
  for (const auto &k : first_derivative_keys(s))
    if (k == key)
      return true;
  for (const auto &k : second_derivative_keys(s))
    if (k == key)
      return true;
  // Total semantics also accepts the redundant lower-triangle second keys.
  if (s == DerivativeSemantics::Total)
    for (const auto &k : second_derivative_keys(DerivativeSemantics::Split))
      if (k == key)
        return true;
  return false;
}

} // namespace

TensorGrid load_grid(std::istream &in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error &e) {
    throw InputError(std::string("grid file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object())
    throw InputError("grid file: top level must be an object");
  static const std::vector<std::string> allowed = {
      "format_version", "frequency_rad_per_s", "length_unit", "value_unit_exponent",
      "derivative_semantics", "axes", "blocks", "tolerances", "provenance"};
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw InputError("grid file: unknown key '" + it.key() + "'");

  const json &ver = require(doc, "format_version", "header");
  if (!ver.is_number_integer() || ver.get<int>() != 1)
    throw InputError("header.format_version: only version 1 is supported");

  TensorGrid g;
  g.frequency = as_number(require(doc, "frequency_rad_per_s", "header"),
                          "header.frequency_rad_per_s");
  if (!(g.frequency > 0.0) || !std::isfinite(g.frequency))
    throw InputError("header.frequency_rad_per_s: must be positive");

  const json &unit = require(doc, "length_unit", "header");
  if (!unit.is_string())
    throw InputError("header.length_unit: expected a string");
  g.length_unit = unit.get<std::string>();
  (void)g.length_scale(); // validates

  if (doc.contains("value_unit_exponent")) {
    const json &e = doc["value_unit_exponent"];
    if (!e.is_number_integer())
      throw InputError("header.value_unit_exponent: expected an integer");
    g.value_unit_exponent = e.get<int>();
  } else {
    throw InputError("header: missing required key 'value_unit_exponent'");
  }

  const json &sem = require(doc, "derivative_semantics", "header");
  if (sem == "total")
    g.semantics = DerivativeSemantics::Total;
  else if (sem == "split")
    g.semantics = DerivativeSemantics::Split;
  else
    throw InputError("header.derivative_semantics: expected \"total\" or \"split\"");

  const json &axes = require(doc, "axes", "header");
  if (!axes.is_object())
    throw InputError("header.axes: expected an object with x, y, z");
  for (auto it = axes.begin(); it != axes.end(); ++it)
    if (it.key() != "x" && it.key() != "y" && it.key() != "z")
      throw InputError("header.axes: unknown axis '" + it.key() + "'");
  for (int a = 0; a < 3; ++a) {
    const std::string where = "header.axes." + axis_key(a);
    const json &ax = require(axes, kAxisNames[a], "header.axes");
    if (ax.is_number()) {
      g.raw_axes.coords[a] = {ax.get<double>()};
      g.raw_axes.fixed[a] = true;
    } else if (ax.is_array()) {
      for (std::size_t i = 0; i < ax.size(); ++i)
        g.raw_axes.coords[a].push_back(
            as_number(ax[i], where + "[" + std::to_string(i) + "]"));
    } else {
      throw InputError(where + ": expected an array or a fixed scalar");
    }
  }
  check_axes(g.raw_axes, "header.");
  int free_axes = 0;
  for (int a = 0; a < 3; ++a)
    free_axes += g.raw_axes.count(a) > 1;
  if (free_axes < 2 && g.raw_axes.node_count() > 1)
    throw InputError("header.axes: grids must be planar or volumetric");
  g.axes = g.raw_axes;
  for (auto &c : g.axes.coords)
    for (auto &x : c)
      x *= g.length_scale();

  if (doc.contains("tolerances")) {
    const json &tol = doc["tolerances"];
    if (!tol.is_object())
      throw InputError("tolerances: expected an object");
    for (auto it = tol.begin(); it != tol.end(); ++it) {
      const double v = as_number(it.value(), "tolerances." + it.key());
      if (!(v > 0.0))
        throw InputError("tolerances." + it.key() + ": must be positive");
      if (it.key() == "symmetry_rel")
        g.symmetry_tol = v;
      else if (it.key() == "derivative_rel")
        g.derivative_tol = v;
      else
        throw InputError("tolerances: unknown key '" + it.key() + "'");
    }
  }
  if (doc.contains("provenance")) {
    if (!doc["provenance"].is_object())
      throw InputError("provenance: expected an object");
    g.provenance_json = doc["provenance"].dump();
  }

  const json &blocks = require(doc, "blocks", "body");
  if (!blocks.is_object())
    throw InputError("blocks: expected an object");
  const std::size_t nodes = g.axes.node_count();
  for (auto it = blocks.begin(); it != blocks.end(); ++it) {
    const std::string &key = it.key();
    const std::string where = "blocks." + key;
    if (!valid_block_key(key, g.semantics))
      throw InputError(where + ": key not valid under derivative_semantics \"" +
                       sem.get<std::string>() + "\"");
    const json &arr = it.value();
    if (!arr.is_array())
      throw InputError(where + ": expected an array of 3x3 blocks");
    if (arr.size() != nodes)
      throw InputError(where + ": has " + std::to_string(arr.size()) +
                       " node blocks, axes define " + std::to_string(nodes));
    GridBlock raw(nodes), si(nodes);
    const double s = g.block_scale(block_order(key));
    for (std::size_t n = 0; n < nodes; ++n) {
      raw[n] = parse_tensor(arr[n], where + "[" + std::to_string(n) + "]");
      si[n] = raw[n];
      for (auto &x : si[n].data)
        x *= s;
    }
    g.raw_blocks[key] = std::move(raw);
    g.blocks[key] = std::move(si);
  }
  if (!g.has_block("value"))
    throw InputError("blocks: missing required block 'value'");
  return g;
}

TensorGrid load_grid_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw InputError("cannot open grid file '" + path + "'");
  try {
    return load_grid(in);
  } catch (const InputError &e) {
    throw InputError(path + ": " + e.what());
  }
}

// ----------------------------------------------------------------- saving

void save_grid(const TensorGrid &g, std::ostream &out) {
  json doc;
  doc["format_version"] = 1;
  doc["frequency_rad_per_s"] = g.frequency;
  doc["length_unit"] = g.length_unit;
  doc["value_unit_exponent"] = g.value_unit_exponent;
  doc["derivative_semantics"] =
      g.semantics == DerivativeSemantics::Total ? "total" : "split";
  json axes = json::object();
  for (int a = 0; a < 3; ++a) {
    if (g.raw_axes.fixed[a])
      axes[axis_key(a)] = g.raw_axes.coords[a][0];
    else
      axes[axis_key(a)] = g.raw_axes.coords[a];
  }
  doc["axes"] = axes;
  doc["tolerances"] = {{"symmetry_rel", g.symmetry_tol},
                       {"derivative_rel", g.derivative_tol}};
  doc["provenance"] = json::parse(g.provenance_json);
  json blocks = json::object();
  for (const auto &[key, data] : g.raw_blocks) {
    json arr = json::array();
    for (const auto &t : data) {
      json rows = json::array();
      for (int r = 0; r < 3; ++r) {
        json row = json::array();
        for (int c = 0; c < 3; ++c)
          row.push_back({t(r, c).real(), t(r, c).imag()});
        rows.push_back(row);
      }
      arr.push_back(rows);
    }
    blocks[key] = arr;
  }
  doc["blocks"] = blocks;
  out << doc.dump(1) << '\n';
}

std::string save_grid_string(const TensorGrid &grid) {
  std::ostringstream os;
  save_grid(grid, os);
  return os.str();
}

// ----------------------------------------------------------- interpolation

namespace {

struct AxisBracket {
  std::size_t i0 = 0, i1 = 0;
  double t = 0.0;
};

AxisBracket bracket(const std::vector<double> &c, double x, int a) {
  if (c.size() == 1) {
    const double tol = 1e-9 * std::max(std::abs(c[0]), 1e-9);
    if (std::abs(x - c[0]) > tol)
      throw InputError("point outside grid: " + axis_key(a) + " must equal the fixed " +
                       "coordinate");
    return {0, 0, 0.0};
  }
  const double span = c.back() - c.front();
  const double tol = 1e-12 * span;
  if (x < c.front() - tol || x > c.back() + tol)
    throw InputError("point outside grid hull along " + axis_key(a));
  x = std::clamp(x, c.front(), c.back());
  auto it = std::upper_bound(c.begin(), c.end(), x);
  std::size_t i1 = static_cast<std::size_t>(it - c.begin());
  if (i1 >= c.size())
    i1 = c.size() - 1;
  const std::size_t i0 = i1 - 1;
  double t = (x - c[i0]) / (c[i1] - c[i0]);
  // Land exactly on nodes so node values come back unmodified.
  if (x == c[i0])
    t = 0.0;
  if (x == c[i1])
    t = 1.0;
  return {i0, i1, t};
}

} // namespace

GreensJet jet_at(const TensorGrid &grid, const Vec3 &point) {
  AxisBracket br[3];
  for (int a = 0; a < 3; ++a)
    br[a] = bracket(grid.axes.coords[a], point[a], a);

  // Corner weights; zero-weight corners are skipped so nodes stay exact.
  struct Corner {
    std::size_t flat;
    double w;
  };
  std::vector<Corner> corners;
  for (int cx = 0; cx < 2; ++cx)
    for (int cy = 0; cy < 2; ++cy)
      for (int cz = 0; cz < 2; ++cz) {
        const double w = (cx ? br[0].t : 1.0 - br[0].t) *
                         (cy ? br[1].t : 1.0 - br[1].t) *
                         (cz ? br[2].t : 1.0 - br[2].t);
        if (w == 0.0)
          continue;
        if ((cx && br[0].i1 == br[0].i0) || (cy && br[1].i1 == br[1].i0) ||
            (cz && br[2].i1 == br[2].i0))
          continue;
        corners.push_back({grid.axes.index(cx ? br[0].i1 : br[0].i0,
                                           cy ? br[1].i1 : br[1].i0,
                                           cz ? br[2].i1 : br[2].i0),
                           w});
      }

  auto interp = [&](const GridBlock &b) {
    RealTensor3x3 out;
    if (corners.size() == 1 && corners[0].w == 1.0) {
      for (std::size_t i = 0; i < 9; ++i)
        out.data[i] = b[corners[0].flat].data[i].imag();
      return out;
    }
    for (const auto &c : corners)
      for (std::size_t i = 0; i < 9; ++i)
        out.data[i] += c.w * b[c.flat].data[i].imag();
    return out;
  };

  GreensJet jet;
  jet.part = JetPart::ImaginaryOnly;
  const RealTensor3x3 v = interp(grid.blocks.at("value"));
  for (std::size_t i = 0; i < 9; ++i)
    jet.value.data[i] = cplx(0.0, v.data[i]);

  jet.has_first = grid.has_first_derivatives();
  jet.has_mixed = grid.has_mixed_derivatives();
  if (jet.has_first) {
    for (int k = 0; k < 3; ++k) {
      const RealTensor3x3 d1 = interp(grid.blocks.at("d1_" + axis_key(k)));
      RealTensor3x3 obs, src;
      if (grid.semantics == DerivativeSemantics::Split) {
        obs = d1;
        src = interp(grid.blocks.at("d1_" + axis_key(k) + "_src"));
      } else {
        obs = d1;
        obs *= 0.5;
        src = obs;
      }
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          jet.d_obs(i, j, k) = cplx(0.0, obs(i, j));
          jet.d_src(i, j, k) = cplx(0.0, src(i, j));
        }
    }
  }
  if (jet.has_mixed) {
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l) {
        const RealTensor3x3 d2 = interp(grid.blocks.at("d2_" + axis_key(k) + axis_key(l)));
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            jet.d_mixed(i, j, k, l) = cplx(0.0, d2(i, j));
      }
  }
  return jet;
}

// ------------------------------------------------------ finite differences

namespace {

// 1-D first-derivative stencil: offsets (in steps) and weights (times 1/h).
struct Stencil {
  int n = 0;
  int offset[3] = {0, 0, 0};
  double weight[3] = {0, 0, 0};
};

Stencil first_stencil(const GridAxes &axes, int a, double x, double h) {
  const auto &c = axes.coords[a];
  if (c.size() > 1) {
    const double eps = 1e-12 * (c.back() - c.front());
    if (x - h < c.front() - eps)
      return {3, {0, 1, 2}, {-1.5, 2.0, -0.5}};
    if (x + h > c.back() + eps)
      return {3, {0, -1, -2}, {1.5, -2.0, 0.5}};
  }
  return {2, {-1, 1, 0}, {-0.5, 0.5, 0.0}};
}

struct Stencil2 {
  int n = 0;
  int offset[4] = {0, 0, 0, 0};
  double weight[4] = {0, 0, 0, 0};
};

Stencil2 second_stencil(const GridAxes &axes, int a, double x, double h) {
  const auto &c = axes.coords[a];
  if (c.size() > 1) {
    const double eps = 1e-12 * (c.back() - c.front());
    if (x - h < c.front() - eps)
      return {4, {0, 1, 2, 3}, {2.0, -5.0, 4.0, -1.0}};
    if (x + h > c.back() + eps)
      return {4, {0, -1, -2, -3}, {2.0, -5.0, 4.0, -1.0}};
  }
  return {3, {-1, 0, 1, 0}, {1.0, -2.0, 1.0, 0.0}};
}

void check_step(const GridAxes &axes, double h) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw InputError("finite-difference step must be positive");
  const double hmin = axes.min_spacing();
  if (std::isfinite(hmin) && h > 0.5 * hmin * (1.0 + 1e-12))
    throw InputError("finite-difference step exceeds half the minimum node spacing");
}

Vec3 shifted(Vec3 p, int a, double d) {
  p[a] += d;
  return p;
}

template <class Body> void for_nodes(std::size_t n, const FDOptions &opt, Body body) {
  if (opt.parallel) {
    const int threads = opt.workers > 0 ? opt.workers : 0;
    if (threads > 0) {
#pragma omp parallel for schedule(static) num_threads(threads)
      for (long i = 0; i < static_cast<long>(n); ++i)
        body(static_cast<std::size_t>(i));
    } else {
#pragma omp parallel for schedule(static)
      for (long i = 0; i < static_cast<long>(n); ++i)
        body(static_cast<std::size_t>(i));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i)
      body(i);
  }
}

ComplexTensor3x3 as_imag(const RealTensor3x3 &t) {
  ComplexTensor3x3 out;
  for (std::size_t i = 0; i < 9; ++i)
    out.data[i] = cplx(0.0, t.data[i]);
  return out;
}

} // namespace

BlockMap finite_difference_blocks(const PointSampler &sampler, const GridAxes &axes,
                                  const FDOptions &opt) {
  check_axes(axes, "");
  check_step(axes, opt.step);
  const double h = opt.step;
  const std::size_t n = axes.node_count();
  const auto d1_keys = first_derivative_keys(DerivativeSemantics::Total);
  const auto d2_keys = second_derivative_keys(DerivativeSemantics::Total);
  BlockMap out;
  for (const auto &k : d1_keys)
    out[k].resize(n);
  for (const auto &k : d2_keys)
    out[k].resize(n);
  std::vector<GridBlock *> d1(3), d2;
  for (int a = 0; a < 3; ++a)
    d1[a] = &out[d1_keys[a]];
  for (const auto &k : d2_keys)
    d2.push_back(&out[k]);

  for_nodes(n, opt, [&](std::size_t node) {
    const Vec3 r = axes.node(node);
    for (int a = 0; a < 3; ++a) {
      const Stencil s = first_stencil(axes, a, r[a], h);
      RealTensor3x3 acc;
      for (int i = 0; i < s.n; ++i)
        acc += sampler(shifted(r, a, s.offset[i] * h)) * s.weight[i];
      (*d1[a])[node] = as_imag(acc * (1.0 / h));
    }
    std::size_t slot = 0;
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b, ++slot) {
        RealTensor3x3 acc;
        if (a == b) {
          const Stencil2 s = second_stencil(axes, a, r[a], h);
          for (int i = 0; i < s.n; ++i)
            acc += sampler(shifted(r, a, s.offset[i] * h)) * s.weight[i];
        } else {
          const Stencil sa = first_stencil(axes, a, r[a], h);
          const Stencil sb = first_stencil(axes, b, r[b], h);
          for (int i = 0; i < sa.n; ++i)
            for (int j = 0; j < sb.n; ++j)
              acc += sampler(shifted(shifted(r, a, sa.offset[i] * h), b, sb.offset[j] * h)) *
                     (sa.weight[i] * sb.weight[j]);
        }
        (*d2[slot])[node] = as_imag(acc * (1.0 / (h * h)));
      }
  });
  return out;
}

BlockMap finite_difference_blocks(const PairSampler &sampler, const GridAxes &axes,
                                  const FDOptions &opt) {
  check_axes(axes, "");
  check_step(axes, opt.step);
  const double h = opt.step;
  const std::size_t n = axes.node_count();
  BlockMap out;
  std::vector<GridBlock *> obs(3), src(3), mixed(9);
  for (int a = 0; a < 3; ++a) {
    obs[a] = &out["d1_" + axis_key(a)];
    src[a] = &out["d1_" + axis_key(a) + "_src"];
    obs[a]->resize(n);
    src[a]->resize(n);
    for (int b = 0; b < 3; ++b) {
      mixed[3 * a + b] = &out["d2_" + axis_key(a) + axis_key(b)];
      mixed[3 * a + b]->resize(n);
    }
  }

  for_nodes(n, opt, [&](std::size_t node) {
    const Vec3 r = axes.node(node);
    Stencil st[3];
    for (int a = 0; a < 3; ++a)
      st[a] = first_stencil(axes, a, r[a], h);
    for (int a = 0; a < 3; ++a) {
      RealTensor3x3 o, s;
      for (int i = 0; i < st[a].n; ++i) {
        const Vec3 p = shifted(r, a, st[a].offset[i] * h);
        const double w = st[a].weight[i];
        o += sampler(p, r) * w;
        s += sampler(r, p) * w;
      }
      (*obs[a])[node] = as_imag(o * (1.0 / h));
      (*src[a])[node] = as_imag(s * (1.0 / h));
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        RealTensor3x3 acc;
        for (int i = 0; i < st[a].n; ++i)
          for (int j = 0; j < st[b].n; ++j)
            acc += sampler(shifted(r, a, st[a].offset[i] * h),
                           shifted(r, b, st[b].offset[j] * h)) *
                   (st[a].weight[i] * st[b].weight[j]);
        (*mixed[3 * a + b])[node] = as_imag(acc * (1.0 / (h * h)));
      }
  });
  return out;
}

// ------------------------------------------------------------- validation

bool GridValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const GridCheck &c) { return c.passed; });
}

GridValidationReport validate_grid(const TensorGrid &g) {
  GridValidationReport rep;
  const GridBlock &value = g.blocks.at("value");
  const std::size_t n = g.axes.node_count();

  // Units: Im G_ii(r, r) of a passive environment is positive and, for any
  // realistic structure, within many decades of the vacuum value w/(6 pi c).
  {
    GridCheck c{"unit_sanity", true, 0.0, ""};
    const double vac = g.frequency / (6.0 * constants::pi * constants::c);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    bool any_imag = false, any_real = false;
    for (const auto &t : value)
      for (int i = 0; i < 3; ++i) {
        const double d = t(i, i).imag() / vac;
        lo = std::min(lo, d);
        hi = std::max(hi, d);
        any_imag |= t(i, i).imag() != 0.0;
        any_real |= t(i, i).real() != 0.0;
      }
    if (!any_imag) {
      c.passed = false;
      c.detail = any_real ? "diagonal data only in real parts; entries are [re, im] "
                            "and only Im is used"
                          : "value block is identically zero";
    } else if (lo < 0.0) {
      c.passed = false;
      c.detail = "negative Im G_ii at some node";
    } else if (lo < 1e-6 || hi > 1e15) {
      c.passed = false;
      c.detail = "Im G_ii / (w/6 pi c) outside [1e-6, 1e15]; check length_unit";
    }
    c.worst = hi;
    if (c.detail.empty())
      c.detail = "Im G_ii / vacuum in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
    rep.checks.push_back(c);
  }

  // Reciprocity at coincidence.
  {
    GridCheck c{"symmetry", true, 0.0, ""};
    std::size_t worst_node = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double scale = std::max(max_abs(value[k]), 1e-300);
      for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
          const double r = std::abs(value[k](i, j) - value[k](j, i)) / scale;
          if (r > c.worst) {
            c.worst = r;
            worst_node = k;
          }
        }
    }
    c.passed = c.worst <= g.symmetry_tol;
    c.detail = "worst at node " + std::to_string(worst_node);
    rep.checks.push_back(c);
  }

  // Presence of the blocks the semantics defines.
  {
    GridCheck c{"derivative_blocks", true, 0.0, ""};
    std::vector<std::string> missing;
    for (const auto &k : first_derivative_keys(g.semantics))
      if (!g.has_block(k))
        missing.push_back(k);
    for (const auto &k : second_derivative_keys(g.semantics))
      if (!g.has_block(k))
        missing.push_back(k);
    c.passed = missing.empty();
    c.worst = static_cast<double>(missing.size());
    if (!missing.empty()) {
      c.detail = "missing:";
      for (const auto &k : missing)
        c.detail += " " + k;
    } else if (g.semantics == DerivativeSemantics::Total) {
      c.detail = "total semantics: mixed d/dr d/dr' block unavailable";
    }
    rep.checks.push_back(c);
  }

  // Supplied first derivatives against FD of the value block along each
  // axis with at least three nodes: d/dx_a V = (d/dr_a + d/dr'_a) G.
  {
    GridCheck c{"derivative_consistency", true, 0.0, ""};
    int compared = 0;
    for (int a = 0; a < 3; ++a) {
      const std::string key = "d1_" + axis_key(a);
      if (g.axes.count(a) < 3 || !g.has_block(key))
        continue;
      const bool split = g.semantics == DerivativeSemantics::Split;
      if (split && !g.has_block(key + "_src"))
        continue;
      const auto &ca = g.axes.coords[a];
      double num = 0.0, scale = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        // Node index along a.
        std::size_t stride = 1;
        for (int b = a + 1; b < 3; ++b)
          stride *= g.axes.count(b);
        const std::size_t ia = (k / stride) % g.axes.count(a);
        std::size_t i0, i1, i2;
        double w0, w1, w2;
        // Second-order three-point derivative on a nonuniform axis.
        if (ia == 0) {
          i0 = 0, i1 = 1, i2 = 2;
        } else if (ia + 1 == g.axes.count(a)) {
          i0 = ia - 2, i1 = ia - 1, i2 = ia;
        } else {
          i0 = ia - 1, i1 = ia, i2 = ia + 1;
        }
        const double x = ca[ia], x0 = ca[i0], x1 = ca[i1], x2 = ca[i2];
        w0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
        w1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
        w2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
        const std::size_t base = k - ia * stride;
        for (std::size_t e = 0; e < 9; ++e) {
          const double fd = w0 * value[base + i0 * stride].data[e].imag() +
                            w1 * value[base + i1 * stride].data[e].imag() +
                            w2 * value[base + i2 * stride].data[e].imag();
          double sup = g.blocks.at(key)[k].data[e].imag();
          if (split)
            sup += g.blocks.at(key + "_src")[k].data[e].imag();
          num = std::max(num, std::abs(fd - sup));
          scale = std::max({scale, std::abs(fd), std::abs(sup),
                            std::abs(value[k].data[e].imag()) / (ca.back() - ca.front())});
        }
      }
      ++compared;
      c.worst = std::max(c.worst, scale > 0.0 ? num / scale : 0.0);
    }
    c.passed = c.worst <= g.derivative_tol;
    c.detail = compared == 0 ? "not checked (no axis with >= 3 nodes and blocks)"
                             : "axes compared: " + std::to_string(compared);
    rep.checks.push_back(c);
  }
  return rep;
}

TensorGrid sample_homogeneous_grid(double omega, double n, const GridAxes &axes_si,
                                   const FDOptions &opt) {
  const Medium medium = Medium::constant(n);
  TensorGrid g = make_grid(omega, axes_si, DerivativeSemantics::Split);
  const GreensJet c = coincident_im_jet(omega, medium);
  g.set_block_si("value", GridBlock(g.axes.node_count(), c.value));
  const PairSampler s = [&](const Vec3 &r, const Vec3 &rp) {
    return im_homogeneous(r - rp, omega, medium);
  };
  for (auto &[key, block] : finite_difference_blocks(s, g.axes, opt))
    g.set_block_si(key, std::move(block));
  return g;
}

} // namespace mqed
