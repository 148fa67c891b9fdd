#pragma once

/**
 * JSON and aligned-text renderings of the experiment reports.
 *
 * JSON payloads carry a top-level `"schema": 1` and echo the experiment
 * configuration, but never execution knobs (threads, output paths): the
 * same seed must produce byte-identical JSON however the run is scheduled.
 */

#include <string>

#include <json.hpp>

#include "bbmlab/stats.hpp"

namespace bbmlab::report {

nlohmann::json to_json(const stats::CltReport& r);
nlohmann::json to_json(const stats::SmoothingReport& r);
nlohmann::json to_json(const stats::MartingaleReport& r);
nlohmann::json to_json(const stats::FreeEnergyReport& r);

std::string to_text(const stats::CltReport& r);
std::string to_text(const stats::SmoothingReport& r);
std::string to_text(const stats::MartingaleReport& r);
std::string to_text(const stats::FreeEnergyReport& r);

}  // namespace bbmlab::report
