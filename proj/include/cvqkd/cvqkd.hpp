#pragma once

#include "cvqkd/cli.hpp"
#include "cvqkd/errors.hpp"
#include "cvqkd/gaussian.hpp"
#include "cvqkd/linalg.hpp"
#include "cvqkd/montecarlo.hpp"
#include "cvqkd/protocol.hpp"
#include "cvqkd/rng.hpp"
