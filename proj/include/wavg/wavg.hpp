#pragma once

// Umbrella include for the whole library.

#include "wavg/conditions.hpp"
#include "wavg/disjoint_paths.hpp"
#include "wavg/generators.hpp"
#include "wavg/graph.hpp"
#include "wavg/graph_io.hpp"
#include "wavg/metrics.hpp"
#include "wavg/protocols.hpp"
#include "wavg/scenario.hpp"
#include "wavg/sim.hpp"
#include "wavg/verify.hpp"
