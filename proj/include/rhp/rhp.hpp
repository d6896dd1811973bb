#pragma once

#include "rhp/cluster.hpp"
#include "rhp/config.hpp"
#include "rhp/distributions.hpp"
#include "rhp/error.hpp"
#include "rhp/events.hpp"
#include "rhp/io.hpp"
#include "rhp/pgfl.hpp"
#include "rhp/random.hpp"
#include "rhp/renewal.hpp"
#include "rhp/simulate.hpp"
#include "rhp/stats.hpp"
#include "rhp/validate.hpp"
