#pragma once

// Umbrella header for the fairkm library.

#include "fairkm/campaign.hpp"
#include "fairkm/csv.hpp"
#include "fairkm/errors.hpp"
#include "fairkm/fair.hpp"
#include "fairkm/ingest.hpp"
#include "fairkm/kmeans.hpp"
#include "fairkm/matrix.hpp"
#include "fairkm/metrics.hpp"
#include "fairkm/random.hpp"
#include "fairkm/schema.hpp"
#include "fairkm/suffstats.hpp"
#include "fairkm/types.hpp"
#include "fairkm/version.hpp"
