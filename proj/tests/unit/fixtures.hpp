#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "chanest/config.hpp"
#include "chanest/experiment.hpp"

#ifndef CHANEST_SOURCE_DIR
#define CHANEST_SOURCE_DIR "."
#endif

namespace fixture {

inline chanest::ExperimentConfig desk_config() {
  return chanest::load_config(std::string(CHANEST_SOURCE_DIR) + "/configs/desk.cfg");
}

// Same measurement the harness builds for one (trial, bits, snr) cell.
inline chanest::Measurement measure(const chanest::ExperimentConfig& cfg, chanest::TrialInstance& inst, int bits,
                                    double snr_db) {
  const chanest::ComplexVector z = inst.op().forward(inst.x());
  const double power = z.squaredNorm() / static_cast<double>(z.size());
  const double tau_w = power / std::pow(10.0, std::min(snr_db, 300.0) / 10.0);
  const auto spec = chanest::quantizer_for(cfg, bits, std::sqrt(power + tau_w));
  return chanest::simulate_measurements(inst.x(), inst.op(), snr_db, spec, inst.noise_seed());
}

}  // namespace fixture
