#include "mqed/report.hpp"
#include "mqed/constants.hpp"
#include "mqed/errors.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace mqed {

namespace {

double number(const json &j, const std::string &where) {
  if (!j.is_number())
    throw InputError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v))
    throw InputError(where + ": non-finite number");
  return v;
}

cplx complex_entry(const json &j, const std::string &where) {
  if (j.is_number())
    return cplx(number(j, where), 0.0);
  if (!j.is_array() || j.size() != 2)
    throw InputError(where + ": expected [re, im]");
  return cplx(number(j[0], where + "[0]"), number(j[1], where + "[1]"));
}

Vec3 real_vec(const json &j, const std::string &where) {
  if (!j.is_array() || j.size() != 3)
    throw InputError(where + ": expected 3 numbers");
  return {number(j[0], where + "[0]"), number(j[1], where + "[1]"),
          number(j[2], where + "[2]")};
}

CVec3 complex_vec(const json &j, const std::string &where) {
  if (!j.is_array() || j.size() != 3)
    throw InputError(where + ": expected 3 complex entries");
  CVec3 v;
  for (int i = 0; i < 3; ++i)
    v[i] = complex_entry(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

ComplexTensor3x3 complex_tensor(const json &j, const std::string &where) {
  if (!j.is_array() || j.size() != 3)
    throw InputError(where + ": expected a 3x3 array");
  ComplexTensor3x3 t;
  for (int r = 0; r < 3; ++r) {
    const CVec3 row = complex_vec(j[r], where + "[" + std::to_string(r) + "]");
    for (int c = 0; c < 3; ++c)
      t(r, c) = row[c];
  }
  return t;
}

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

void reject_unknown(const json &j, const std::set<std::string> &allowed,
                    const std::string &where) {
  if (!j.is_object())
    throw InputError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw InputError(where + ": unknown key '" + it.key() + "'");
}

json parse_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    throw InputError(path + ": invalid JSON: " + e.what());
  }
}

} // namespace

MultipoleEmitter emitter_from_json(const json &j, const std::string &where) {
  reject_unknown(j,
                 {"position_m", "omega0_rad_per_s", "frequency", "d_Cm", "m_J_per_T",
                  "Q_Cm2", "d_atomic", "m_bohr_magnetons", "Q_atomic", "Q_real_symmetric",
                  "name"},
                 where);
  MultipoleEmitter e;
  if (j.contains("position_m"))
    e.position = real_vec(j["position_m"], where + ".position_m");
  const bool has_w = j.contains("omega0_rad_per_s"), has_f = j.contains("frequency");
  if (has_w == has_f)
    throw InputError(where + ": give exactly one of omega0_rad_per_s or frequency");
  if (has_w) {
    e.omega0 = number(j["omega0_rad_per_s"], where + ".omega0_rad_per_s");
  } else {
    if (!j["frequency"].is_string())
      throw InputError(where + ".frequency: expected a string such as \"384THz\"");
    try {
      e.omega0 = parse_frequency(j["frequency"].get<std::string>());
    } catch (const InputError &err) {
      throw InputError(where + ".frequency: " + err.what());
    }
  }
  auto pick = [&](const char *si, const char *au, double scale, auto parse, auto &out) {
    if (j.contains(si) && j.contains(au))
      throw InputError(where + ": both " + si + " and " + au + " given");
    if (j.contains(si))
      out = parse(j[si], where + "." + si);
    if (j.contains(au)) {
      out = parse(j[au], where + "." + au);
      for (auto &x : out)
        x *= scale;
    }
  };
  pick("d_Cm", "d_atomic", constants::dipole_au, complex_vec, e.d);
  pick("m_J_per_T", "m_bohr_magnetons", constants::mu_B, complex_vec, e.m);
  auto tensor_parse = [](const json &x, const std::string &w) { return complex_tensor(x, w).data; };
  pick("Q_Cm2", "Q_atomic", constants::quadrupole_au, tensor_parse, e.Q.data);
  try {
    e.validate();
  } catch (const InputError &err) {
    throw InputError(where + ": " + err.what());
  }
  if (j.contains("Q_real_symmetric")) {
    if (!j["Q_real_symmetric"].is_boolean())
      throw InputError(where + ".Q_real_symmetric: expected true or false");
    if (j["Q_real_symmetric"].get<bool>()) {
      try {
        e.check_real_symmetric_Q();
      } catch (const InputError &err) {
        throw InputError(where + ": " + err.what());
      }
    }
  }
  return e;
}

MultipoleEmitter load_emitter_file(const std::string &path) {
  return emitter_from_json(parse_file(path), path);
}

json emitter_to_json(const MultipoleEmitter &e) {
  json j;
  j["position_m"] = {e.position[0], e.position[1], e.position[2]};
  j["omega0_rad_per_s"] = e.omega0;
  json d = json::array(), m = json::array(), q = json::array();
  for (int i = 0; i < 3; ++i) {
    d.push_back(to_json(e.d[i]));
    m.push_back(to_json(e.m[i]));
    json row = json::array();
    for (int k = 0; k < 3; ++k)
      row.push_back(to_json(e.Q(i, k)));
    q.push_back(row);
  }
  j["d_Cm"] = d;
  j["m_J_per_T"] = m;
  j["Q_Cm2"] = q;
  return j;
}

std::unique_ptr<Environment> environment_from_json(const json &j, const std::string &where) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw InputError(where + ": expected an object with a string 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "homogeneous") {
    reject_unknown(j, {"kind", "n"}, where);
    const double n = j.contains("n") ? number(j["n"], where + ".n") : 1.0;
    if (!(n >= 1.0))
      throw InputError(where + ".n: refractive index must be >= 1");
    return std::make_unique<HomogeneousEnvironment>(n);
  }
  if (kind == "modes") {
    reject_unknown(j, {"kind", "modes"}, where);
    if (!j.contains("modes") || !j["modes"].is_array() || j["modes"].empty())
      throw InputError(where + ".modes: expected a non-empty array");
    std::vector<LorentzianMode> modes;
    for (std::size_t i = 0; i < j["modes"].size(); ++i) {
      const json &mj = j["modes"][i];
      const std::string w = where + ".modes[" + std::to_string(i) + "]";
      reject_unknown(mj,
                     {"omega_r_rad_per_s", "eta_rad_per_s", "strength", "amplitude",
                      "gradient", "center_m"},
                     w);
      LorentzianMode m;
      for (const char *k : {"omega_r_rad_per_s", "eta_rad_per_s", "strength"})
        if (!mj.contains(k))
          throw InputError(w + ": missing '" + k + "'");
      m.omega_r = number(mj["omega_r_rad_per_s"], w + ".omega_r_rad_per_s");
      m.eta = number(mj["eta_rad_per_s"], w + ".eta_rad_per_s");
      m.strength = number(mj["strength"], w + ".strength");
      if (mj.contains("amplitude"))
        m.amplitude = real_vec(mj["amplitude"], w + ".amplitude");
      if (mj.contains("center_m"))
        m.center = real_vec(mj["center_m"], w + ".center_m");
      if (mj.contains("gradient")) {
        const json &g = mj["gradient"];
        if (!g.is_array() || g.size() != 3)
          throw InputError(w + ".gradient: expected 3x3");
        for (int r = 0; r < 3; ++r) {
          const Vec3 row = real_vec(g[r], w + ".gradient[" + std::to_string(r) + "]");
          for (int c = 0; c < 3; ++c)
            m.gradient(r, c) = row[c];
        }
      }
      modes.push_back(m);
    }
    try {
      return std::make_unique<ModeExpansionEnvironment>(std::move(modes));
    } catch (const InputError &err) {
      throw InputError(where + ": " + err.what());
    }
  }
  throw InputError(where + ".kind: expected \"homogeneous\" or \"modes\"");
}

std::string channel_pair_name(const ChannelPair &p) {
  return std::string(channel_name(p.first)) + "_" + channel_name(p.second);
}

std::string format_double(double x) {
  if (x == 0.0)
    return "0";
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x)
      break;
  }
  return buf;
}

json rate_report_to_json(const RateReport &r) {
  json j;
  j["omega_rad_per_s"] = r.omega;
  j["gamma_total_per_s"] = r.gamma_total;
  json pairs = json::object();
  for (const auto &[p, g] : r.gamma_by_channel_pair)
    pairs[channel_pair_name(p)] = g;
  j["gamma_by_channel_pair_per_s"] = pairs;
  if (r.delta)
    j["delta_rad_per_s"] = *r.delta;
  else
    j["delta_rad_per_s"] = "unavailable";
  j["imag_residual_per_s"] = r.imag_residual;
  return j;
}

json free_space_to_json(const FreeSpaceRates &r, double n, double omega) {
  return {{"n", n},
          {"omega_rad_per_s", omega},
          {"gamma_ED_per_s", r.ed},
          {"gamma_MD_per_s", r.md},
          {"gamma_EQ_per_s", r.eq},
          {"gamma_total_per_s", r.total()}};
}

json coupling_to_json(const CouplingReport &r) {
  return {{"omega_bar_rad_per_s", r.omega_bar},
          {"method", method_name(r.method)},
          {"xi_rad_per_s", to_json(r.xi)},
          {"xi_error_rad_per_s", r.xi_error},
          {"gamma_cross_per_s", to_json(r.gamma_cross)},
          {"xi_langevin_rad_per_s", r.xi_langevin},
          {"gamma_langevin_per_s", r.gamma_langevin}};
}

json lamb_shift_to_json(const LambShiftReport &r) {
  return {{"delta_rad_per_s", r.delta},
          {"error_rad_per_s", r.error},
          {"imag_residual_rad_per_s", r.imag_residual},
          {"method", method_name(r.method)}};
}

json validation_to_json(const GridValidationReport &r) {
  json checks = json::array();
  for (const auto &c : r.checks)
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"worst", c.worst},
                      {"detail", c.detail}});
  return {{"all_passed", r.all_passed()}, {"checks", checks}};
}

namespace {

const ChannelPair kPairs[9] = {
    {Channel::ED, Channel::ED}, {Channel::ED, Channel::MD}, {Channel::ED, Channel::EQ},
    {Channel::MD, Channel::ED}, {Channel::MD, Channel::MD}, {Channel::MD, Channel::EQ},
    {Channel::EQ, Channel::ED}, {Channel::EQ, Channel::MD}, {Channel::EQ, Channel::EQ}};

double lookup(const std::map<ChannelPair, double> &m, const ChannelPair &p) {
  auto it = m.find(p);
  return it == m.end() ? 0.0 : it->second;
}

} // namespace

json map_to_json(const EnhancementMap &m) {
  json j;
  json chans = json::array();
  for (Channel c : m.channels)
    chans.push_back(channel_name(c));
  j["normalization"] = {{"gamma_fs_per_s", m.gamma_fs},
                        {"channels", chans},
                        {"note", "gamma_fs is the n = 1 free-space rate restricted to "
                                 "the emitter's nonzero selected channels"},
                        {"gamma_ED_fs_per_s", m.free_space.ed},
                        {"gamma_MD_fs_per_s", m.free_space.md},
                        {"gamma_EQ_fs_per_s", m.free_space.eq}};
  json nodes = json::array();
  for (const auto &n : m.nodes) {
    json nj;
    nj["position_m"] = {n.position[0], n.position[1], n.position[2]};
    nj["rate"] = rate_report_to_json(n.rate);
    nj["enhancement_total"] = n.enhancement_total;
    json ec = json::object(), norm = json::object();
    for (const auto &[c, v] : n.enhancement_channel)
      ec[channel_name(c)] = v;
    for (const auto &[p, v] : n.normalized)
      norm[channel_pair_name(p)] = v;
    nj["enhancement_channel"] = ec;
    nj["normalized_pair"] = norm;
    nodes.push_back(nj);
  }
  j["nodes"] = nodes;
  return j;
}

std::string map_to_csv(const EnhancementMap &m) {
  std::ostringstream os;
  os << "# mqed enhancement map, csv schema 1\n";
  os << "# units: x_m,y_m,z_m in m; gamma_* in 1/s; enh_* and norm_* dimensionless\n";
  os << "# enh_X = gamma_X_X / gamma_X_fs; norm_A_B = gamma_A_B / gamma_fs\n";
  os << "# gamma_fs_per_s = " << format_double(m.gamma_fs) << " (channels:";
  for (Channel c : m.channels)
    os << ' ' << channel_name(c);
  os << ")\n";
  os << "x_m,y_m,z_m,gamma_total";
  for (const auto &p : kPairs)
    os << ",gamma_" << channel_pair_name(p);
  os << ",enh_total";
  for (Channel c : m.channels)
    os << ",enh_" << channel_name(c);
  for (const auto &p : kPairs)
    os << ",norm_" << channel_pair_name(p);
  os << '\n';
  for (const auto &n : m.nodes) {
    os << format_double(n.position[0]) << ',' << format_double(n.position[1]) << ','
       << format_double(n.position[2]) << ',' << format_double(n.rate.gamma_total);
    for (const auto &p : kPairs)
      os << ',' << format_double(lookup(n.rate.gamma_by_channel_pair, p));
    os << ',' << format_double(n.enhancement_total);
    for (Channel c : m.channels)
      os << ',' << format_double(n.enhancement_channel.at(c));
    for (const auto &p : kPairs)
      os << ',' << format_double(lookup(n.normalized, p));
    os << '\n';
  }
  return os.str();
}

json trajectory_to_json(const Trajectory &t) {
  json j;
  j["t_s"] = t.t;
  json sig = json::array(), sz = json::array();
  for (std::size_t i = 0; i < t.t.size(); ++i) {
    json row = json::array();
    for (auto s : t.sigma[i])
      row.push_back(to_json(s));
    sig.push_back(row);
    sz.push_back(t.sigma_z[i]);
  }
  j["sigma"] = sig;
  j["sigma_z"] = sz;
  j["max_trace_error"] = t.max_trace_error;
  j["min_eigenvalue"] = t.min_eigenvalue;
  j["error_estimate"] = t.error_estimate;
  return j;
}

std::string trajectory_to_csv(const Trajectory &t) {
  std::ostringstream os;
  const std::size_t n = t.sigma.empty() ? 0 : t.sigma[0].size();
  os << "# mqed trajectory, csv schema 1\n";
  os << "# t in s; sigma in the lab frame\n";
  os << "t_s";
  for (std::size_t a = 0; a < n; ++a)
    os << ",re_sigma_" << a << ",im_sigma_" << a << ",sigma_z_" << a;
  os << '\n';
  for (std::size_t i = 0; i < t.t.size(); ++i) {
    os << format_double(t.t[i]);
    for (std::size_t a = 0; a < n; ++a)
      os << ',' << format_double(t.sigma[i][a].real()) << ','
         << format_double(t.sigma[i][a].imag()) << ',' << format_double(t.sigma_z[i][a]);
    os << '\n';
  }
  return os.str();
}

void write_file_atomic(const std::string &path, const std::string &content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw InputError("cannot write '" + tmp + "'");
    out << content;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw InputError("write to '" + tmp + "' failed");
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    const std::string why = std::strerror(errno);
    std::remove(tmp.c_str());
    throw InputError("cannot rename '" + tmp + "' to '" + path + "': " + why);
  }
}

} // namespace mqed
