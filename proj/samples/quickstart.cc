//
// Copyright 2026 The GeoPrivacy Budgeting Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Minimal walk-through: one range counting query answered with the baseline
// and with iterative elimination, on the same users and noise stream.

#include <cstdio>
#include <vector>

#include "geopriv/geopriv.h"

int main() {
  geopriv::Rng rng(2024);
  std::vector<geopriv::RealVector> points;
  for (int i = 0; i < 500; ++i) points.push_back({rng.Uniform(0, 100), rng.Uniform(0, 100)});

  const geopriv::Rectangle range = geopriv::Rectangle::AxisAligned({50, 50}, 40, 40);
  const double rho = 0.05;
  std::printf("true count: %zu\n", geopriv::TrueRangeCount(points, range));

  for (geopriv::QueryMode mode : {geopriv::QueryMode::kBmPoint, geopriv::QueryMode::kPmPoint}) {
    geopriv::AnalystSession session = geopriv::MakePointSession(points, rho, 99);
    const std::vector<geopriv::UserId> users = geopriv::AllUsers(session);
    geopriv::RangeCountOptions opts;
    opts.query.mode = mode;
    opts.query.rounds = 4;
    const geopriv::RangeCountResult r = geopriv::RangeCount(
        session, users, range, geopriv::UniformAllocation(users, rho), opts);
    double spent = 0.0;
    for (const auto& [id, s] : r.spent) spent += s;
    std::printf("%-9s estimate %6.1f  path %-11s  budget used %.1f%%\n",
                geopriv::ModeName(mode), r.estimate, geopriv::PathName(r.path),
                100.0 * spent / (rho * static_cast<double>(users.size())));
  }
  return 0;
}
