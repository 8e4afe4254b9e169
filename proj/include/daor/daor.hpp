#pragma once

#include "daor/channel.hpp"
#include "daor/design.hpp"
#include "daor/harness.hpp"
#include "daor/metrics.hpp"
#include "daor/numerics.hpp"
#include "daor/parallel.hpp"
#include "daor/powalloc.hpp"
#include "daor/rng.hpp"
