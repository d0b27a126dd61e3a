// Copyright 2026 The Guide Bidding Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "guide/policy/selection.hpp"

#include <iomanip>
#include <sstream>

#include "guide/common/binary_io.hpp"

namespace guide {

void write_selection_csv(std::span<const SelectionLog> logs,
                         const std::filesystem::path& path) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "episode,step,a_dt,a_idm,q_dt,q_idm,chosen,emitted\n";
  for (std::size_t e = 0; e < logs.size(); ++e) {
    for (const auto& r : logs[e]) {
      out << e << ',' << r.step << ',' << r.a_dt << ',' << r.a_idm << ','
          << r.q_dt << ',' << r.q_idm << ',' << to_string(r.chosen) << ','
          << r.emitted << '\n';
    }
  }
  const std::string text = out.str();
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                             text.size()));
}

}  // namespace guide
