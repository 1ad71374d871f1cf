#include "cli.hpp"

#include "mqed/constants.hpp"
#include "mqed/dynamics.hpp"
#include "mqed/errors.hpp"
#include "mqed/greens_grid.hpp"
#include "mqed/rates.hpp"
#include "mqed/report.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

namespace mqed::cli {

namespace {

struct Common {
  std::string out_path;
  std::string format = "json";
  bool quiet = false;
};

void add_common(CLI::App *sub, Common &c) {
  sub->add_option("--out", c.out_path, "Output file (written atomically); stdout if absent");
  sub->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sub->add_flag("--quiet", c.quiet, "Suppress the summary line on stderr");
}

void emit(const Common &c, const std::string &content, std::ostream &out) {
  if (c.out_path.empty())
    out << content;
  else
    write_file_atomic(c.out_path, content);
}

std::string dump(const json &j) { return j.dump(2) + "\n"; }

ChannelSelector channels_from(const std::string &s) {
  return s.empty() ? ChannelSelector::all() : ChannelSelector::parse(s);
}

json read_json_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    throw InputError(path + ": invalid JSON: " + e.what());
  }
}

Vec3 axis_vector(const std::string &axis) {
  if (axis == "x")
    return {1, 0, 0};
  if (axis == "y")
    return {0, 1, 0};
  if (axis == "z")
    return {0, 0, 1};
  throw InputError("--axis must be x, y or z");
}

// ---- free-space ------------------------------------------------------------

struct FreeSpaceArgs {
  Common common;
  std::string emitter, frequency, channels;
  double n = 1.0;
};

int cmd_free_space(const FreeSpaceArgs &a, std::ostream &out, std::ostream &err) {
  MultipoleEmitter e = load_emitter_file(a.emitter).restricted(channels_from(a.channels));
  const double w = a.frequency.empty() ? e.omega0 : parse_frequency(a.frequency);
  const FreeSpaceRates r = free_space_rates(e, a.n, w);
  if (a.common.format == "json") {
    emit(a.common, dump(free_space_to_json(r, a.n, w)), out);
  } else {
    std::ostringstream os;
    os << "# mqed free-space rates, csv schema 1\n"
       << "# omega in rad/s; gamma_* in 1/s\n"
       << "n,omega_rad_per_s,gamma_ED_per_s,gamma_MD_per_s,gamma_EQ_per_s,gamma_total_per_s\n"
       << format_double(a.n) << ',' << format_double(w) << ',' << format_double(r.ed) << ','
       << format_double(r.md) << ',' << format_double(r.eq) << ','
       << format_double(r.total()) << '\n';
    emit(a.common, os.str(), out);
  }
  if (!a.common.quiet)
    err << "free-space: gamma_total = " << format_double(r.total()) << " 1/s\n";
  return kOk;
}

// ---- map -------------------------------------------------------------------

struct MapArgs {
  Common common;
  std::string grid, emitter, channels;
  int workers = 0;
};

int cmd_map(const MapArgs &a, std::ostream &out, std::ostream &err) {
  const TensorGrid grid = load_grid_file(a.grid);
  const MultipoleEmitter e = load_emitter_file(a.emitter);
  MapOptions opt;
  opt.channels = channels_from(a.channels);
  opt.parallel = a.workers != 1;
  opt.workers = a.workers;
  const EnhancementMap m = enhancement_map(grid, e, opt);
  emit(a.common, a.common.format == "json" ? dump(map_to_json(m)) : map_to_csv(m), out);
  if (!a.common.quiet) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto &node : m.nodes) {
      lo = std::min(lo, node.enhancement_total);
      hi = std::max(hi, node.enhancement_total);
    }
    err << "map: " << m.nodes.size() << " nodes, total enhancement in ["
        << format_double(lo) << ", " << format_double(hi) << "]\n";
  }
  return kOk;
}

// ---- couple ----------------------------------------------------------------

struct CoupleArgs {
  Common common;
  std::vector<std::string> emitters;
  std::string env_file, method, axis = "z", sweep;
  double n = 1.0;
  std::optional<double> separation;
  double tol_rel = 0.0;
  double max_detuning = 1e-2;
};

std::unique_ptr<Environment> environment_from(const std::string &file, double n) {
  if (!file.empty())
    return environment_from_json(read_json_file(file), file);
  return std::make_unique<HomogeneousEnvironment>(n);
}

std::vector<double> parse_sweep(const std::string &s) {
  double lo = 0, hi = 0;
  int count = 0;
  char c1 = 0, c2 = 0;
  std::istringstream is(s);
  if (!(is >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' || !is.eof())
    throw InputError("--sweep expects Rmin:Rmax:count");
  if (!(lo > 0) || !(hi > lo) || count < 2)
    throw InputError("--sweep needs 0 < Rmin < Rmax and count >= 2");
  std::vector<double> r(count);
  for (int i = 0; i < count; ++i)
    r[i] = lo * std::pow(hi / lo, double(i) / (count - 1));
  return r;
}

int cmd_couple(const CoupleArgs &a, std::ostream &out, std::ostream &err) {
  if (a.emitters.empty() || a.emitters.size() > 2)
    throw InputError("couple takes one or two --emitter files");
  const MultipoleEmitter ea = load_emitter_file(a.emitters[0]);
  MultipoleEmitter eb = a.emitters.size() == 2 ? load_emitter_file(a.emitters[1]) : ea;
  const auto env = environment_from(a.env_file, a.n);

  CouplingOptions opt;
  opt.max_detuning_ratio = a.max_detuning;
  if (a.tol_rel > 0)
    opt.quad.rel_tol = a.tol_rel;
  if (!a.method.empty())
    opt.method = parse_method(a.method);
  else
    opt.method = env->supports_frequency_integrals() ? IntegralMethod::ImaginaryAxis
                                                     : IntegralMethod::OnShell;

  std::vector<std::optional<double>> seps;
  if (!a.sweep.empty()) {
    if (a.separation)
      throw InputError("--separation and --sweep are exclusive");
    for (double r : parse_sweep(a.sweep))
      seps.emplace_back(r);
  } else {
    seps.push_back(a.separation);
  }
  const Vec3 dir = axis_vector(a.axis);

  json rows = json::array();
  std::ostringstream csv;
  csv << "# mqed couple, csv schema 1\n"
      << "# separation in m; xi in rad/s; gamma in 1/s; empty xi when unavailable\n"
      << "separation_m,re_xi,im_xi,xi_error,re_gamma_cross,im_gamma_cross,xi_langevin,"
         "gamma_langevin\n";
  for (const auto &sep : seps) {
    MultipoleEmitter b = eb;
    if (sep)
      b.position = ea.position + (*sep) * dir;
    const double r = norm(b.position - ea.position);
    json row;
    row["separation_m"] = r;
    // Coincident points in a medium without frequency integrals: only the
    // collective rate is finite.
    if (r == 0.0 && !env->supports_frequency_integrals()) {
      const double wbar = mean_frequency(ea, b, opt.max_detuning_ratio);
      const cplx g = collective_rate(
          ea, b, env->at(ea.position, b.position).evaluate(cplx(wbar, 0.0)), wbar);
      row["omega_bar_rad_per_s"] = wbar;
      row["gamma_cross_per_s"] = json::array({g.real(), g.imag()});
      row["xi_rad_per_s"] = "unavailable";
      csv << "0,,,," << format_double(g.real()) << ',' << format_double(g.imag()) << ",,\n";
    } else {
      const CouplingReport c = couple(ea, b, *env, opt);
      row.update(coupling_to_json(c));
      csv << format_double(r) << ',' << format_double(c.xi.real()) << ','
          << format_double(c.xi.imag()) << ',' << format_double(c.xi_error) << ','
          << format_double(c.gamma_cross.real()) << ',' << format_double(c.gamma_cross.imag())
          << ',' << format_double(c.xi_langevin) << ',' << format_double(c.gamma_langevin)
          << '\n';
    }
    rows.push_back(row);
  }

  json doc;
  doc["environment"] = env->kind();
  doc["rows"] = rows;
  if (env->supports_frequency_integrals() && opt.method != IntegralMethod::OnShell) {
    const auto shift = [&](const MultipoleEmitter &e) {
      return lamb_shift_to_json(
          lamb_shift(e, env->at(e.position, e.position), opt.method, opt.quad));
    };
    doc["lamb_shift_a"] = shift(ea);
    if (a.emitters.size() == 2)
      doc["lamb_shift_b"] = shift(eb);
  }
  emit(a.common, a.common.format == "json" ? dump(doc) : csv.str(), out);
  if (!a.common.quiet)
    err << "couple: " << rows.size() << " separation(s), method " << method_name(opt.method)
        << "\n";
  return kOk;
}

// ---- dynamics --------------------------------------------------------------

struct DynamicsArgs {
  Common common;
  std::string spec;
  double t_end = 0.0;
  int points = 0;
  double tol_rel = 0.0;
};

Eigen::MatrixXcd complex_matrix(const json &j, int n, const std::string &where) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw InputError(where + ": expected " + std::to_string(n) + " rows");
  Eigen::MatrixXcd m(n, n);
  for (int r = 0; r < n; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != n)
      throw InputError(where + "[" + std::to_string(r) + "]: expected " + std::to_string(n) +
                       " entries");
    for (int c = 0; c < n; ++c) {
      const json &x = j[r][c];
      if (x.is_number())
        m(r, c) = x.get<double>();
      else if (x.is_array() && x.size() == 2 && x[0].is_number() && x[1].is_number())
        m(r, c) = cplx(x[0].get<double>(), x[1].get<double>());
      else
        throw InputError(where + ": entries must be numbers or [re, im]");
    }
  }
  return m;
}

double get_number(const json &j, const char *key, const std::string &where) {
  if (!j.contains(key) || !j[key].is_number())
    throw InputError(where + ": missing number '" + key + "'");
  return j[key].get<double>();
}

void only_keys(const json &j, std::initializer_list<const char *> keys,
               const std::string &where) {
  if (!j.is_object())
    throw InputError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char *k : keys)
      ok = ok || it.key() == k;
    if (!ok)
      throw InputError(where + ": unknown key '" + it.key() + "'");
  }
}

EmitterEnsembleModel model_from_json(const json &j, const std::string &where) {
  only_keys(j, {"omega_bar_rad_per_s", "delta_rad_per_s", "xi_rad_per_s", "gamma_per_s"},
            where);
  EmitterEnsembleModel m;
  m.omega_bar = get_number(j, "omega_bar_rad_per_s", where);
  if (!j.contains("delta_rad_per_s") || !j["delta_rad_per_s"].is_array())
    throw InputError(where + ": missing array 'delta_rad_per_s'");
  const int n = static_cast<int>(j["delta_rad_per_s"].size());
  m.delta.resize(n);
  for (int i = 0; i < n; ++i) {
    if (!j["delta_rad_per_s"][i].is_number())
      throw InputError(where + ".delta_rad_per_s: expected numbers");
    m.delta(i) = j["delta_rad_per_s"][i].get<double>();
  }
  m.xi = j.contains("xi_rad_per_s")
             ? complex_matrix(j["xi_rad_per_s"], n, where + ".xi_rad_per_s")
             : Eigen::MatrixXcd::Zero(n, n);
  if (!j.contains("gamma_per_s"))
    throw InputError(where + ": missing 'gamma_per_s'");
  m.gamma = complex_matrix(j["gamma_per_s"], n, where + ".gamma_per_s");
  return m;
}

json model_to_json(const EmitterEnsembleModel &m) {
  json j;
  j["omega_bar_rad_per_s"] = m.omega_bar;
  j["delta_rad_per_s"] = std::vector<double>(m.delta.data(), m.delta.data() + m.size());
  auto mat = [&](const Eigen::MatrixXcd &x) {
    json rows = json::array();
    for (int r = 0; r < x.rows(); ++r) {
      json row = json::array();
      for (int c = 0; c < x.cols(); ++c)
        row.push_back({x(r, c).real(), x(r, c).imag()});
      rows.push_back(row);
    }
    return rows;
  };
  j["xi_rad_per_s"] = mat(m.xi);
  j["gamma_per_s"] = mat(m.gamma);
  return j;
}

Eigen::MatrixXcd initial_state(const json &j, int n, const std::string &where) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw InputError(where + ": expected an object with a string 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "excited" || kind == "ground") {
    only_keys(j, {"kind", "emitters"}, where);
    std::vector<QubitState> s(n);
    for (auto &q : s)
      q.sigma_z = -1.0;
    if (kind == "excited" && !j.contains("emitters"))
      for (auto &q : s)
        q.sigma_z = 1.0;
    if (j.contains("emitters")) {
      if (kind != "excited")
        throw InputError(where + ": 'emitters' only applies to kind 'excited'");
      for (const auto &idx : j["emitters"]) {
        if (!idx.is_number_integer() || idx.get<int>() < 0 || idx.get<int>() >= n)
          throw InputError(where + ".emitters: indices must lie in [0, " +
                           std::to_string(n) + ")");
        s[idx.get<int>()].sigma_z = 1.0;
      }
    }
    return product_state(s);
  }
  if (kind == "single_excitation") {
    only_keys(j, {"kind", "amplitudes"}, where);
    if (!j.contains("amplitudes") || !j["amplitudes"].is_array() ||
        static_cast<int>(j["amplitudes"].size()) != n)
      throw InputError(where + ".amplitudes: expected one entry per emitter");
    std::vector<cplx> c;
    for (const auto &x : j["amplitudes"]) {
      if (x.is_number())
        c.emplace_back(x.get<double>(), 0.0);
      else if (x.is_array() && x.size() == 2 && x[0].is_number() && x[1].is_number())
        c.emplace_back(x[0].get<double>(), x[1].get<double>());
      else
        throw InputError(where + ".amplitudes: entries must be numbers or [re, im]");
    }
    return single_excitation_state(c);
  }
  throw InputError(where + ".kind: expected excited, ground or single_excitation");
}

int cmd_dynamics(const DynamicsArgs &a, std::ostream &out, std::ostream &err) {
  const json spec = read_json_file(a.spec);
  only_keys(spec, {"model", "emitters", "environment", "method", "initial", "times"}, a.spec);
  if (spec.contains("model") == spec.contains("emitters"))
    throw InputError(a.spec + ": give exactly one of 'model' or 'emitters'");

  EmitterEnsembleModel model;
  if (spec.contains("model")) {
    model = model_from_json(spec["model"], a.spec + ".model");
  } else {
    if (!spec["emitters"].is_array())
      throw InputError(a.spec + ".emitters: expected an array");
    std::vector<MultipoleEmitter> emitters;
    for (std::size_t i = 0; i < spec["emitters"].size(); ++i) {
      const json &x = spec["emitters"][i];
      const std::string w = a.spec + ".emitters[" + std::to_string(i) + "]";
      emitters.push_back(x.is_string() ? load_emitter_file(x.get<std::string>())
                                       : emitter_from_json(x, w));
    }
    const auto env = spec.contains("environment")
                         ? environment_from_json(spec["environment"], a.spec + ".environment")
                         : std::make_unique<HomogeneousEnvironment>(1.0);
    CouplingOptions opt;
    if (spec.contains("method")) {
      if (!spec["method"].is_string())
        throw InputError(a.spec + ".method: expected a string");
      opt.method = parse_method(spec["method"].get<std::string>());
    } else if (!env->supports_frequency_integrals()) {
      opt.method = IntegralMethod::OnShell;
    }
    if (a.tol_rel > 0)
      opt.quad.rel_tol = a.tol_rel;
    model = build_ensemble(emitters, *env, opt);
  }
  const int n = model.size();
  if (n < 1)
    throw InputError(a.spec + ": empty ensemble");

  const Eigen::MatrixXcd rho0 =
      spec.contains("initial") ? initial_state(spec["initial"], n, a.spec + ".initial")
                               : initial_state(json{{"kind", "excited"}}, n, "initial");

  double t_end = a.t_end;
  int points = a.points;
  if (spec.contains("times")) {
    only_keys(spec["times"], {"t_end_s", "count"}, a.spec + ".times");
    if (t_end <= 0)
      t_end = get_number(spec["times"], "t_end_s", a.spec + ".times");
    if (points <= 0)
      points = static_cast<int>(get_number(spec["times"], "count", a.spec + ".times"));
  }
  if (!(t_end > 0) || points < 2)
    throw InputError("time grid needs t_end > 0 and at least 2 points (--t-end, --points)");
  std::vector<double> times(points);
  for (int i = 0; i < points; ++i)
    times[i] = t_end * i / (points - 1);

  EvolveOptions eo;
  if (a.tol_rel > 0)
    eo.rel_tol = a.tol_rel;
  const Trajectory tr = evolve_ensemble(model, rho0, times, eo);
  if (a.common.format == "json") {
    json j = trajectory_to_json(tr);
    j["model"] = model_to_json(model);
    emit(a.common, dump(j), out);
  } else {
    emit(a.common, trajectory_to_csv(tr), out);
  }
  if (!a.common.quiet)
    err << "dynamics: " << n << " emitter(s), " << points
        << " samples, max trace error " << format_double(tr.max_trace_error) << "\n";
  return kOk;
}

// ---- validate --------------------------------------------------------------

struct ValidateArgs {
  Common common;
  std::string grid;
};

int cmd_validate(const ValidateArgs &a, std::ostream &out, std::ostream &err) {
  const GridValidationReport r = validate_grid(load_grid_file(a.grid));
  if (a.common.format == "json") {
    emit(a.common, dump(validation_to_json(r)), out);
  } else {
    std::ostringstream os;
    os << "# mqed grid validation, csv schema 1\n"
       << "check,passed,worst,detail\n";
    for (const auto &c : r.checks) {
      std::string detail = c.detail;
      for (char &ch : detail)
        if (ch == ',' || ch == '\n')
          ch = ';';
      os << c.name << ',' << (c.passed ? 1 : 0) << ',' << format_double(c.worst) << ','
         << detail << '\n';
    }
    emit(a.common, os.str(), out);
  }
  if (!a.common.quiet)
    err << "validate: " << (r.all_passed() ? "all checks passed" : "FAILED") << "\n";
  // A grid that fails validation is bad input.
  return r.all_passed() ? kOk : kInputError;
}

} // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Multipolar emission rates and couplings from Green's tensors", "mqed"};
  app.set_config("--config", "", "INI/TOML file with option values; unknown keys rejected");
  app.allow_config_extras(false);
  app.require_subcommand(1);

  FreeSpaceArgs fs;
  auto *s_fs = app.add_subcommand("free-space", "Free-space ED/MD/EQ rates");
  s_fs->add_option("--emitter", fs.emitter, "Emitter JSON file")->required();
  s_fs->add_option("--n", fs.n, "Refractive index")->capture_default_str();
  s_fs->add_option("--frequency", fs.frequency,
                   "Override transition frequency, e.g. 384THz or 2.4e15rad/s");
  s_fs->add_option("--channels", fs.channels, "Subset of ed,md,eq");
  add_common(s_fs, fs.common);

  MapArgs mp;
  auto *s_map = app.add_subcommand("map", "Enhancement map over a Green-tensor grid");
  s_map->add_option("--grid", mp.grid, "Grid JSON file")->required();
  s_map->add_option("--emitter", mp.emitter, "Emitter JSON file")->required();
  s_map->add_option("--channels", mp.channels, "Subset of ed,md,eq");
  s_map->add_option("--workers", mp.workers, "Threads; 1 runs the serial path, 0 = default")
      ->check(CLI::NonNegativeNumber);
  mp.common.format = "csv";
  add_common(s_map, mp.common);

  CoupleArgs cp;
  auto *s_cp = app.add_subcommand("couple", "Pairwise coupling xi and collective rate");
  s_cp->add_option("--emitter", cp.emitters, "Emitter JSON file (give one or two)")
      ->required();
  auto *env_opt = s_cp->add_option("--env", cp.env_file, "Environment JSON file");
  s_cp->add_option("--n", cp.n, "Homogeneous refractive index when --env is absent")
      ->excludes(env_opt);
  s_cp->add_option("--method", cp.method, "pv, imaginary-axis or on-shell");
  s_cp->add_option("--separation", cp.separation, "Place emitter b at a + R * axis (m)");
  s_cp->add_option("--axis", cp.axis, "Separation axis x, y or z")->capture_default_str();
  s_cp->add_option("--sweep", cp.sweep, "Log-spaced separations Rmin:Rmax:count (m)");
  s_cp->add_option("--tol-rel", cp.tol_rel, "Relative quadrature tolerance");
  s_cp->add_option("--max-detuning", cp.max_detuning,
                   "Allowed |w_a - w_b| as a fraction of the mean")
      ->capture_default_str();
  add_common(s_cp, cp.common);

  DynamicsArgs dy;
  auto *s_dy = app.add_subcommand("dynamics", "Master-equation trajectory of an ensemble");
  s_dy->add_option("--ensemble", dy.spec, "Ensemble JSON file")->required();
  s_dy->add_option("--t-end", dy.t_end, "Final time (s)");
  s_dy->add_option("--points", dy.points, "Number of output times");
  s_dy->add_option("--tol-rel", dy.tol_rel, "Relative tolerance of the integrators");
  dy.common.format = "csv";
  add_common(s_dy, dy.common);

  ValidateArgs va;
  auto *s_va = app.add_subcommand("validate", "Check a Green-tensor grid file");
  s_va->add_option("--grid", va.grid, "Grid JSON file")->required();
  add_common(s_va, va.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (s_fs->parsed())
      return cmd_free_space(fs, out, err);
    if (s_map->parsed())
      return cmd_map(mp, out, err);
    if (s_cp->parsed())
      return cmd_couple(cp, out, err);
    if (s_dy->parsed())
      return cmd_dynamics(dy, out, err);
    if (s_va->parsed())
      return cmd_validate(va, out, err);
  } catch (const InputError &e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const NumericalError &e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const json::exception &e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kNumericalError;
  }
  return kInputError;
}

} // namespace mqed::cli
