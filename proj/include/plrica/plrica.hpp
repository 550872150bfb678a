#pragma once

#include "plrica/asymptotics.hpp"
#include "plrica/baselines.hpp"
#include "plrica/config.hpp"
#include "plrica/distributions.hpp"
#include "plrica/effect.hpp"
#include "plrica/errors.hpp"
#include "plrica/experiment.hpp"
#include "plrica/ica.hpp"
#include "plrica/numeric.hpp"
#include "plrica/plr.hpp"
#include "plrica/random.hpp"
