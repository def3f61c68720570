#pragma once

#include "config.hpp"
#include "error.hpp"
#include "numeric.hpp"
#include "dist.hpp"
#include "supremum.hpp"
#include "metrics.hpp"
#include "transport.hpp"
#include "verify.hpp"
#include "reshuffle.hpp"
#include "io.hpp"
