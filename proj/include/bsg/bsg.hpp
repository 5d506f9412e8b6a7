#pragma once

#include "bsg/config.hpp"
#include "bsg/game.hpp"
#include "bsg/limits.hpp"
#include "bsg/matrix.hpp"
#include "bsg/metrics.hpp"
#include "bsg/network.hpp"
#include "bsg/rng.hpp"
#include "bsg/selection.hpp"
#include "bsg/sharing.hpp"
#include "bsg/table.hpp"
