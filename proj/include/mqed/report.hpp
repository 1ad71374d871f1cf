#pragma once

#include "mqed/dynamics.hpp"
#include "mqed/emitter.hpp"
#include "mqed/greens_grid.hpp"
#include "mqed/rates.hpp"
#include "mqed/spectral_model.hpp"

#include <json.hpp>

#include <memory>
#include <string>
#include <vector>

namespace mqed {

using nlohmann::json;

// Emitter file:
//   position_m [x,y,z]; omega0_rad_per_s number or frequency "384THz";
//   d_Cm / m_J_per_T [[re,im] x3]; Q_Cm2 3x3 of [re,im];
//   or in atomic units d_atomic (e a0), m_bohr_magnetons (mu_B),
//   Q_atomic (e a0^2); optional Q_real_symmetric: true (checked).
MultipoleEmitter emitter_from_json(const json &j, const std::string &where = "emitter");
MultipoleEmitter load_emitter_file(const std::string &path);
json emitter_to_json(const MultipoleEmitter &e);

// {"kind": "homogeneous", "n": 1.0} or
// {"kind": "modes", "modes": [{omega_r_rad_per_s, eta_rad_per_s, strength,
//   amplitude [3], gradient [[3]x3] (m^-1), center_m [3]}]}
std::unique_ptr<Environment> environment_from_json(const json &j,
                                                   const std::string &where = "environment");

json rate_report_to_json(const RateReport &r);
json free_space_to_json(const FreeSpaceRates &r, double n, double omega);
json coupling_to_json(const CouplingReport &r);
json lamb_shift_to_json(const LambShiftReport &r);
json validation_to_json(const GridValidationReport &r);
json map_to_json(const EnhancementMap &m);
std::string map_to_csv(const EnhancementMap &m);
json trajectory_to_json(const Trajectory &t);
std::string trajectory_to_csv(const Trajectory &t);

std::string channel_pair_name(const ChannelPair &p); // "ED_MD"
// Shortest representation that parses back to the same double.
std::string format_double(double x);

// Writes to path + ".tmp" and renames, so failures leave no partial file.
void write_file_atomic(const std::string &path, const std::string &content);

} // namespace mqed
