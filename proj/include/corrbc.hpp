#pragma once

#include "corrbc/core.hpp"
#include "corrbc/mc_engine.hpp"
#include "corrbc/rational.hpp"
#include "corrbc/hull.hpp"
#include "corrbc/subspace.hpp"
#include "corrbc/channel.hpp"
#include "corrbc/estimation.hpp"
#include "corrbc/p2p_rates.hpp"
#include "corrbc/bc2_rates.hpp"
#include "corrbc/dof_regions.hpp"
#include "corrbc/coloring.hpp"
#include "corrbc/mmimo.hpp"
#include "corrbc/experiments.hpp"
