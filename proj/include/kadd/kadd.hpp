#pragma once

#include "kadd/coalition.hpp"
#include "kadd/game.hpp"
#include "kadd/oracle.hpp"
#include "kadd/total_correlation.hpp"
#include "kadd/exact.hpp"
#include "kadd/transform.hpp"
#include "kadd/wls.hpp"
#include "kadd/svakadd.hpp"
#include "kadd/baselines.hpp"
#include "kadd/bench.hpp"
