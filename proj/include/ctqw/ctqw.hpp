#pragma once

#include "ctqw/errors.hpp"
#include "ctqw/random.hpp"
#include "ctqw/graph.hpp"
#include "ctqw/state.hpp"
#include "ctqw/integrator.hpp"
#include "ctqw/dynamics.hpp"
#include "ctqw/metrics.hpp"
#include "ctqw/kohlrausch.hpp"
#include "ctqw/csv.hpp"
#include "ctqw/experiment.hpp"
