/*
 * Copyright 2026 The detnet5g Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "detnet5g/scenario.hpp"

#include <string>

namespace bench {

// Full mesh of n switches with hosts H1 and H2 on S1 and Sn.
inline detnet5g::Topology mesh(int n)
{
    std::string sw, links;
    int port[16] = {};
    for (int i = 1; i <= n; ++i)
        sw += std::string(i > 1 ? "," : "") + "{\"id\":\"S" + std::to_string(i) + "\"}";
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) {
            if (!links.empty())
                links += ",";
            links += "[\"S" + std::to_string(i) + "." + std::to_string(++port[i]) + "\",\"S" +
                     std::to_string(j) + "." + std::to_string(++port[j]) + "\"]";
        }
    const std::string hosts = "{\"id\":\"H1\",\"attach\":\"S1." + std::to_string(++port[1]) +
                              "\"},{\"id\":\"H2\",\"attach\":\"S" + std::to_string(n) + "." +
                              std::to_string(++port[n]) + "\"}";
    return detnet5g::parse_topology("{\"switches\":[" + sw + "],\"hosts\":[" + hosts + "],\"links\":[" +
                                    links + "]}");
}

} // namespace bench
