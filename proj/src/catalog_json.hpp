// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

// JSON (de)serialisation of catalog entries, shared with the scenario parser.

#include <map>
#include <string>

#include "json.hpp"
#include "rooflinesim/hardware_catalog.hpp"

namespace rooflinesim
{

NodeSpec parse_node(const nlohmann::json &j, const std::string &path,
                    const std::map<std::string, MemoryDeviceSpec> &devices);
nlohmann::json device_to_json(const MemoryDeviceSpec &d);
nlohmann::json node_to_json(const NodeSpec &n);

}  // namespace rooflinesim
