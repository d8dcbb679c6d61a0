#include "sicrx/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace sicrx {

namespace {

double uniform_phase(std::uint64_t seed, std::uint64_t stream) {
  return kTwoPi * (static_cast<double>(derive_seed(seed, stream) >> 11) / 9007199254740992.0);
}

}  // namespace

double AttackerConfig::offset_scale(double t) const {
  if (!ramp.empty()) {
    if (t <= ramp.front()[0]) return 0.0;
    for (std::size_t i = 0; i < ramp.size(); ++i) {
      if (t <= ramp[i][0]) {
        const double t0 = ramp[i - 1][0], s0 = ramp[i - 1][1];
        return s0 + (ramp[i][1] - s0) * (t - t0) / (ramp[i][0] - t0);
      }
    }
    return ramp.back()[1];
  }
  if (takeover == TakeoverMode::kHard) return t >= onset ? 1.0 : 0.0;
  if (t <= onset) return 0.0;
  return std::min(1.0, (t - onset) / ramp_duration);
}

void AttackerConfig::validate() const {
  if (power_advantage_db < -10.0 || power_advantage_db > 20.0) {
    throw std::invalid_argument("attacker: power_advantage_db outside [-10, 20]");
  }
  if (takeover == TakeoverMode::kSeamless && ramp.empty() && ramp_duration <= 0.0) {
    throw std::invalid_argument("attacker: seamless ramp_duration must be > 0");
  }
  for (std::size_t i = 1; i < ramp.size(); ++i) {
    if (ramp[i][0] <= ramp[i - 1][0] || ramp[i][1] < ramp[i - 1][1]) {
      throw std::invalid_argument("attacker: ramp must increase monotonically");
    }
  }
}

const SatelliteSignalParams* Scenario::find_legitimate(int prn) const {
  for (const auto& s : legitimate) {
    if (s.prn_id == prn) return &s;
  }
  return nullptr;
}

std::vector<SatelliteSignalParams> Scenario::attacker_params() const {
  std::vector<SatelliteSignalParams> out;
  if (!has_attacker) return out;
  const double gain = db_to_linear_amplitude(attacker.power_advantage_db);
  for (int prn : attacker.prns) {
    const auto* legit = find_legitimate(prn);
    if (!legit) continue;
    SatelliteSignalParams p = *legit;
    p.amplitude = legit->amplitude * gain;
    p.carrier_phase = uniform_phase(seed, 0xA770u + static_cast<std::uint64_t>(prn));
    if (attacker.nav_mode == SpoofedNavMode::kModified) {
      auto pos = legit->nav.sat_pos_ecef();
      for (int i = 0; i < 3; ++i) pos[i] += attacker.nav_position_offset[i];
      p.nav = NavMessage(prn, pos, legit->nav.tow_offset());
    }
    out.push_back(std::move(p));
  }
  return out;
}

void Scenario::validate(bool require_pvt_geometry) const {
  if (legitimate.empty()) {
    throw std::invalid_argument("scenario: legitimate satellite set is empty");
  }
  if (require_pvt_geometry && legitimate.size() < 4) {
    throw std::invalid_argument("scenario: PVT needs at least 4 legitimate satellites");
  }
  if (duration <= 0.0) throw std::invalid_argument("scenario: duration must be > 0");
  if (noise_density < 0.0) throw std::invalid_argument("scenario: negative noise_density");
  for (const auto& s : legitimate) s.validate();
  if (has_attacker) {
    attacker.validate();
    if (attacker.nav_mode == SpoofedNavMode::kIdentical) {
      for (int prn : attacker.prns) {
        if (!find_legitimate(prn)) {
          throw std::invalid_argument("scenario: spoofed PRN " + std::to_string(prn) +
                                      " has no legitimate counterpart");
        }
      }
    }
  }
}

IqBuffer compose(const Scenario& scenario, double sample_rate) {
  scenario.validate();
  if (sample_rate < 2.0 * kChipRate) {
    throw std::invalid_argument("compose: sample_rate below Nyquist (2.046 MHz)");
  }

  IqBuffer out;
  out.sample_rate = sample_rate;
  out.start_time = 0.0;
  out.samples.assign(static_cast<std::size_t>(std::llround(scenario.duration * sample_rate)),
                     cfloat{});

  for (const auto& sat : scenario.legitimate) {
    const double d0 = sat.path_delay;
    const double drift = sat.doppler / kCarrierFreq;
    add_signal(out, sat, [d0, drift](double t) { return d0 - drift * t; });
  }

  if (scenario.has_attacker) {
    for (const auto& sat : scenario.attacker_params()) {
      const double d0 = sat.path_delay;
      const double drift = sat.doppler / kCarrierFreq;
      double target = 0.0;
      if (auto it = scenario.attacker.code_offset_targets.find(sat.prn_id);
          it != scenario.attacker.code_offset_targets.end()) {
        target = it->second;
      }
      const AttackerConfig& atk = scenario.attacker;
      add_signal(out, sat, [d0, drift, target, &atk](double t) {
        return d0 - drift * t + target * atk.offset_scale(t);
      });
    }
  }

  if (scenario.noise_density > 0.0) {
    std::mt19937_64 rng(derive_seed(scenario.seed, 0x401fe));
    std::normal_distribution<double> gauss(0.0, std::sqrt(scenario.noise_density / 2.0));
    for (auto& s : out.samples) {
      s += cfloat(static_cast<float>(gauss(rng)), static_cast<float>(gauss(rng)));
    }
  }
  return out;
}

std::vector<SatelliteSignalParams> make_constellation(const Vec3& receiver_ecef,
                                                      const Vec3& offset_dir_enu,
                                                      std::uint64_t seed,
                                                      const ConstellationOptions& options) {
  if (options.count < 1 || options.count > 12) {
    throw std::invalid_argument("make_constellation: count must be in 1..12");
  }
  Vec3 u = offset_dir_enu;
  if (norm(u) < 1e-12) u = {0.0, 0.0, 1.0};
  u = scale(u, 1.0 / norm(u));

  // orthonormal pair spanning the plane perpendicular to u
  Vec3 ref = std::abs(u[2]) < 0.9 ? Vec3{0.0, 0.0, 1.0} : Vec3{1.0, 0.0, 0.0};
  Vec3 w1 = {u[1] * ref[2] - u[2] * ref[1], u[2] * ref[0] - u[0] * ref[2],
             u[0] * ref[1] - u[1] * ref[0]};
  w1 = scale(w1, 1.0 / norm(w1));
  Vec3 w2 = {u[1] * w1[2] - u[2] * w1[1], u[2] * w1[0] - u[0] * w1[2],
             u[0] * w1[1] - u[1] * w1[0]};

  std::mt19937_64 rng(derive_seed(seed, 0xC0457));
  std::uniform_real_distribution<double> azimuth(0.0, kTwoPi);
  std::uniform_real_distribution<double> range_draw(options.range_min, options.range_max);
  std::uniform_real_distribution<double> doppler_draw(-options.doppler_span,
                                                      options.doppler_span);
  std::uniform_real_distribution<double> phase_draw(0.0, kTwoPi);
  const double min_up = std::sin(options.min_elevation_deg * kPi / 180.0);

  // one doppler for the whole constellation: with static satellites the
  // shift models the receiver oscillator offset, which is common to every
  // channel (per-satellite doppler spreads would drag the code delays
  // apart while the broadcast positions stand still)
  const double common_doppler = doppler_draw(rng);

  // well-spread PRN choice, deterministic in the seed
  std::vector<int> prn_pool(32);
  for (int i = 0; i < 32; ++i) prn_pool[i] = i + 1;
  std::shuffle(prn_pool.begin(), prn_pool.end(), rng);

  std::vector<SatelliteSignalParams> sats;
  for (int i = 0; i < options.count; ++i) {
    const double proj =
        options.count == 1
            ? options.min_projection
            : options.min_projection + (options.max_projection - options.min_projection) *
                                           static_cast<double>(i) / (options.count - 1);
    const double side = std::sqrt(std::max(0.0, 1.0 - proj * proj));

    Vec3 los{};
    bool ok = false;
    for (int attempt = 0; attempt < 256 && !ok; ++attempt) {
      const double az = azimuth(rng);
      los = add(scale(u, proj),
                add(scale(w1, side * std::cos(az)), scale(w2, side * std::sin(az))));
      ok = los[2] >= min_up;  // ENU up component
    }
    if (!ok) {
      throw std::runtime_error("make_constellation: cannot satisfy elevation constraint");
    }

    const double range = range_draw(rng);
    const auto pos_q =
        NavMessage::quantize_position(ecef_offset_enu(receiver_ecef, scale(los, range)));
    const Vec3 pos = {pos_q[0], pos_q[1], pos_q[2]};

    SatelliteSignalParams p{prn_pool[static_cast<std::size_t>(i)],
                            options.amplitude,
                            norm(sub(pos, receiver_ecef)) / kSpeedOfLight,
                            common_doppler,
                            phase_draw(rng),
                            NavMessage(prn_pool[static_cast<std::size_t>(i)], pos_q,
                                       options.tow_offset)};
    sats.push_back(std::move(p));
  }
  return sats;
}

std::map<int, double> derive_code_offsets(const std::vector<SatelliteSignalParams>& sats,
                                          const Vec3& receiver_ecef, const Vec3& offset_enu) {
  const Vec3 spoofed = ecef_offset_enu(receiver_ecef, offset_enu);
  std::map<int, double> offsets;
  for (const auto& sat : sats) {
    const Vec3 pos = {sat.nav.sat_pos_ecef()[0], sat.nav.sat_pos_ecef()[1],
                      sat.nav.sat_pos_ecef()[2]};
    offsets[sat.prn_id] =
        (norm(sub(pos, spoofed)) - norm(sub(pos, receiver_ecef))) / kSpeedOfLight;
  }
  return offsets;
}

// ---------------------------------------------------------------------------
// config file format

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<double> parse_doubles(const std::string& value, const std::string& key) {
  std::istringstream in(value);
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  if (out.empty()) throw FormatError("scenario config: bad numeric value for " + key);
  return out;
}

Vec3 parse_vec3(const std::string& value, const std::string& key) {
  const auto v = parse_doubles(value, key);
  if (v.size() != 3) throw FormatError("scenario config: " + key + " needs 3 values");
  return {v[0], v[1], v[2]};
}

struct RawSatellite {
  int prn = 0;
  Vec3 pos{};
  double amplitude = 1.0;
  double doppler = 0.0;
  double carrier_phase = 0.0;
  bool has_pos = false;
};

}  // namespace

Scenario parse_scenario(const std::string& text) {
  Scenario sc;
  sc.sample_rate = 0.0;
  std::vector<RawSatellite> sats;
  RawSatellite* cur_sat = nullptr;
  int tow_offset = 16;
  std::string section;
  bool have_receiver = false;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw FormatError("scenario config: bad section header " + line);
      section = trim(line.substr(1, line.size() - 2));
      if (section == "satellite") {
        sats.emplace_back();
        cur_sat = &sats.back();
      } else if (section == "attacker") {
        sc.has_attacker = true;
        sc.attacker.ramp_duration = 0.0;  // must be configured for seamless
      } else if (section != "receiver") {
        throw FormatError("scenario config: unknown section [" + section + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError("scenario config: expected key = value at line " +
                        std::to_string(line_no));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (section.empty()) {
      if (key == "duration") sc.duration = parse_doubles(value, key)[0];
      else if (key == "sample_rate") sc.sample_rate = parse_doubles(value, key)[0];
      else if (key == "noise_density") sc.noise_density = parse_doubles(value, key)[0];
      else if (key == "seed") sc.seed = static_cast<std::uint64_t>(parse_doubles(value, key)[0]);
      else if (key == "tow_offset") tow_offset = static_cast<int>(parse_doubles(value, key)[0]);
      else throw FormatError("scenario config: unknown key " + key);
    } else if (section == "receiver") {
      if (key == "position_ecef") {
        sc.receiver_pos_ecef = parse_vec3(value, key);
        have_receiver = true;
      } else {
        throw FormatError("scenario config: unknown receiver key " + key);
      }
    } else if (section == "satellite") {
      if (key == "prn") cur_sat->prn = static_cast<int>(parse_doubles(value, key)[0]);
      else if (key == "position_ecef") {
        cur_sat->pos = parse_vec3(value, key);
        cur_sat->has_pos = true;
      } else if (key == "amplitude") cur_sat->amplitude = parse_doubles(value, key)[0];
      else if (key == "doppler") cur_sat->doppler = parse_doubles(value, key)[0];
      else if (key == "carrier_phase") cur_sat->carrier_phase = parse_doubles(value, key)[0];
      else throw FormatError("scenario config: unknown satellite key " + key);
    } else if (section == "attacker") {
      auto& atk = sc.attacker;
      if (key == "power_advantage_db") atk.power_advantage_db = parse_doubles(value, key)[0];
      else if (key == "takeover") {
        if (value == "hard") atk.takeover = TakeoverMode::kHard;
        else if (value == "seamless") atk.takeover = TakeoverMode::kSeamless;
        else throw FormatError("scenario config: takeover must be hard|seamless");
      } else if (key == "nav_mode") {
        if (value == "identical") atk.nav_mode = SpoofedNavMode::kIdentical;
        else if (value == "modified") atk.nav_mode = SpoofedNavMode::kModified;
        else throw FormatError("scenario config: nav_mode must be identical|modified");
      } else if (key == "onset") atk.onset = parse_doubles(value, key)[0];
      else if (key == "ramp_duration") atk.ramp_duration = parse_doubles(value, key)[0];
      else if (key == "spoof_offset_enu") atk.spoof_offset_enu = parse_vec3(value, key);
      else if (key == "nav_position_offset") atk.nav_position_offset = parse_vec3(value, key);
      else if (key == "prns") {
        for (double v : parse_doubles(value, key)) atk.prns.push_back(static_cast<int>(v));
      } else {
        throw FormatError("scenario config: unknown attacker key " + key);
      }
    }
  }

  if (sc.sample_rate <= 0.0) throw FormatError("scenario config: sample_rate missing");
  if (!have_receiver) throw FormatError("scenario config: [receiver] position_ecef missing");

  for (const auto& raw_sat : sats) {
    if (raw_sat.prn < 1 || raw_sat.prn > 32 || !raw_sat.has_pos) {
      throw FormatError("scenario config: satellite needs prn and position_ecef");
    }
    const auto pos_q = NavMessage::quantize_position(
        {raw_sat.pos[0], raw_sat.pos[1], raw_sat.pos[2]});
    const Vec3 pos = {pos_q[0], pos_q[1], pos_q[2]};
    SatelliteSignalParams p{raw_sat.prn,
                            raw_sat.amplitude,
                            norm(sub(pos, sc.receiver_pos_ecef)) / kSpeedOfLight,
                            raw_sat.doppler,
                            raw_sat.carrier_phase,
                            NavMessage(raw_sat.prn, pos_q, tow_offset)};
    sc.legitimate.push_back(std::move(p));
  }

  if (sc.has_attacker) {
    if (sc.attacker.prns.empty()) {
      for (const auto& s : sc.legitimate) sc.attacker.prns.push_back(s.prn_id);
    }
    sc.attacker.code_offset_targets =
        derive_code_offsets(sc.legitimate, sc.receiver_pos_ecef, sc.attacker.spoof_offset_enu);
  }

  sc.receiver_truth.samples = {{0.0, {0.0, 0.0, 0.0}}, {sc.duration, {0.0, 0.0, 0.0}}};
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("load_scenario: cannot open " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_scenario(buf.str());
}

std::string format_scenario(const Scenario& sc) {
  std::ostringstream out;
  out.precision(17);
  out << "# attack scenario\n";
  out << "duration = " << sc.duration << "\n";
  out << "sample_rate = " << sc.sample_rate << "\n";
  out << "noise_density = " << sc.noise_density << "\n";
  out << "seed = " << sc.seed << "\n";
  if (!sc.legitimate.empty()) out << "tow_offset = " << sc.legitimate[0].nav.tow_offset() << "\n";
  out << "\n[receiver]\nposition_ecef = " << sc.receiver_pos_ecef[0] << ' '
      << sc.receiver_pos_ecef[1] << ' ' << sc.receiver_pos_ecef[2] << "\n";
  for (const auto& s : sc.legitimate) {
    const auto& p = s.nav.sat_pos_ecef();
    out << "\n[satellite]\n";
    out << "prn = " << s.prn_id << "\n";
    out << "position_ecef = " << p[0] << ' ' << p[1] << ' ' << p[2] << "\n";
    out << "amplitude = " << s.amplitude << "\n";
    out << "doppler = " << s.doppler << "\n";
    out << "carrier_phase = " << s.carrier_phase << "\n";
  }
  if (sc.has_attacker) {
    const auto& a = sc.attacker;
    out << "\n[attacker]\n";
    out << "power_advantage_db = " << a.power_advantage_db << "\n";
    out << "takeover = " << (a.takeover == TakeoverMode::kHard ? "hard" : "seamless") << "\n";
    out << "nav_mode = " << (a.nav_mode == SpoofedNavMode::kIdentical ? "identical" : "modified")
        << "\n";
    out << "onset = " << a.onset << "\n";
    out << "ramp_duration = " << a.ramp_duration << "\n";
    out << "spoof_offset_enu = " << a.spoof_offset_enu[0] << ' ' << a.spoof_offset_enu[1] << ' '
        << a.spoof_offset_enu[2] << "\n";
    out << "prns =";
    for (int prn : a.prns) out << ' ' << prn;
    out << "\n";
    if (a.nav_mode == SpoofedNavMode::kModified) {
      out << "nav_position_offset = " << a.nav_position_offset[0] << ' '
          << a.nav_position_offset[1] << ' ' << a.nav_position_offset[2] << "\n";
    }
  }
  return out.str();
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw FormatError("save_scenario: cannot open " + path);
  f << format_scenario(scenario);
}

}  // namespace sicrx
