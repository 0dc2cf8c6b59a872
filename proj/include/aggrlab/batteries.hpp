#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aggrlab/json.hpp"

namespace aggrlab {

// One measured assertion of a verification battery.
struct BatteryAssertion {
  std::string name;
  double tolerance;
  double measured;
  bool pass;
};

struct BatteryReport {
  std::string battery;
  std::uint64_t seed;
  std::vector<BatteryAssertion> assertions;

  bool pass() const {
    for (const auto& a : assertions)
      if (!a.pass) return false;
    return !assertions.empty();
  }
};

// Registered batteries; UnknownBattery for anything else.
std::vector<std::string> battery_names();
BatteryReport run_battery(const std::string& selector, std::uint64_t seed);

nlohmann::json battery_report_to_json(const BatteryReport& report);

}  // namespace aggrlab
