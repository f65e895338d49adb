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

// Umbrella header for the geopriv library.

#ifndef GEOPRIV_GEOPRIV_H_
#define GEOPRIV_GEOPRIV_H_

#include "geopriv/accountant.h"
#include "geopriv/elimination.h"
#include "geopriv/exact_sum.h"
#include "geopriv/experiment.h"
#include "geopriv/geometry.h"
#include "geopriv/kde.h"
#include "geopriv/knn.h"
#include "geopriv/mechanisms.h"
#include "geopriv/metric.h"
#include "geopriv/protocol.h"
#include "geopriv/query_common.h"
#include "geopriv/range_count.h"
#include "geopriv/rng.h"
#include "geopriv/threshold.h"

#endif  // GEOPRIV_GEOPRIV_H_
