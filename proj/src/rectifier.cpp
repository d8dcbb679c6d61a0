#include "sicrx/rectifier.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sicrx {

namespace {
constexpr double kPlausibleMin = 60e-3;  // s
constexpr double kPlausibleMax = 100e-3;
constexpr double kBandMin = 65e-3;
constexpr double kBandMax = 85e-3;
}  // namespace

PseudorangeSet compute_pseudoranges(const std::vector<ChannelObservation>& channels,
                                    double t_ref) {
  std::vector<const ChannelObservation*> usable;
  for (const auto& c : channels) {
    if (c.locked) usable.push_back(&c);
  }
  if (usable.size() < 4) {
    throw InsufficientSatellites("compute_pseudoranges: need >= 4 locked channels, have " +
                                 std::to_string(usable.size()));
  }
  const double t_rx = usable.front()->t_rx;
  for (const auto* c : usable) {
    if (std::abs(c->t_rx - t_rx) > 0.5 / kChipRate) {
      throw std::invalid_argument("compute_pseudoranges: channels do not share one epoch");
    }
  }

  // reference satellite: earliest arrival = largest emission time
  double t_tx_ref = usable.front()->t_tx;
  for (const auto* c : usable) t_tx_ref = std::max(t_tx_ref, c->t_tx);

  PseudorangeSet set;
  set.t_ref = t_ref;
  set.t_rx = t_rx;
  set.t_ref_warning = t_ref < kBandMin || t_ref > kBandMax;
  for (const auto* c : usable) {
    PseudorangeEntry e;
    e.prn_id = c->prn_id;
    e.pseudorange = kSpeedOfLight * (t_ref + (t_tx_ref - c->t_tx));
    e.rectified = c->rectified;
    if (e.pseudorange < kSpeedOfLight * kPlausibleMin ||
        e.pseudorange > kSpeedOfLight * kPlausibleMax) {
      throw std::invalid_argument("compute_pseudoranges: PRN " + std::to_string(c->prn_id) +
                                  " outside the plausibility band");
    }
    set.entries.push_back(e);
  }
  return set;
}

PseudorangeSet rectify(const std::vector<ChannelObservation>& adversarial_channels,
                       const std::vector<DelayOffset>& offsets, double t_ref) {
  std::vector<int> missing;
  std::vector<ChannelObservation> corrected;
  corrected.reserve(adversarial_channels.size());
  for (const auto& c : adversarial_channels) {
    const auto it = std::find_if(offsets.begin(), offsets.end(),
                                 [&](const DelayOffset& o) { return o.prn_id == c.prn_id; });
    if (it == offsets.end()) {
      missing.push_back(c.prn_id);
      continue;
    }
    ChannelObservation fixed = c;
    // emission observed on the adversarial peak, shifted onto the
    // legitimate arrival: t_tx_l = t_tx_at + (tau_at - tau_l)
    fixed.t_tx = c.t_tx + it->delta();
    fixed.rectified = true;
    corrected.push_back(fixed);
  }
  if (!missing.empty()) {
    std::string msg = "rectify: no delay offset for PRN";
    for (int prn : missing) msg += ' ' + std::to_string(prn);
    throw PartialRectification(msg, std::move(missing));
  }
  return compute_pseudoranges(corrected, t_ref);
}

}  // namespace sicrx
