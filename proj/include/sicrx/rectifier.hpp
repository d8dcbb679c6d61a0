#pragma once

#include <vector>

#include "sicrx/common.hpp"
#include "sicrx/tracking.hpp"

namespace sicrx {

// Adversarial/legitimate code-delay pair for one satellite.
struct DelayOffset {
  int prn_id = 0;
  double tau_at = 0.0;  // s, adversarial code delay
  double tau_l = 0.0;   // s, legitimate code delay
  double delta() const { return tau_at - tau_l; }
};

// One channel's common-reception-time measurement: at the shared receiver
// epoch t_rx, the channel was receiving the signal emitted at t_tx.
struct ChannelObservation {
  int prn_id = 0;
  double t_rx = 0.0;  // s, common receiver epoch
  double t_tx = 0.0;  // s, emission time (tow-anchored)
  bool locked = true;
  bool rectified = false;
};

struct PseudorangeEntry {
  int prn_id = 0;
  double pseudorange = 0.0;  // m
  bool rectified = false;
};

struct PseudorangeSet {
  std::vector<PseudorangeEntry> entries;
  double t_ref = 0.0;  // s, propagation time assigned to the nearest satellite
  double t_rx = 0.0;   // s, common receiver epoch of the measurement
  bool t_ref_warning = false;  // t_ref outside the usual 65-85 ms band
};

// Common-reception-time pseudoranges: the earliest-arriving satellite is
// anchored at t_ref, the rest measured relative through their emission
// times. Requires >= 4 locked channels sharing one epoch.
PseudorangeSet compute_pseudoranges(const std::vector<ChannelObservation>& channels,
                                    double t_ref);

// Pseudoranges of the legitimate signals computed from channels tracking
// the adversarial peaks: each emission time is shifted by the measured
// delay offset, which is algebraically identical to measuring the
// legitimate peak directly. Requires an offset for every channel
// (PartialRectification lists the missing PRNs otherwise) and identical
// nav content between the two signal sets.
PseudorangeSet rectify(const std::vector<ChannelObservation>& adversarial_channels,
                       const std::vector<DelayOffset>& offsets, double t_ref);

}  // namespace sicrx
