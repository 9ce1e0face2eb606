#pragma once

#include "fairheat/bundled.hpp"
#include "fairheat/compare.hpp"
#include "fairheat/control.hpp"
#include "fairheat/coordination.hpp"
#include "fairheat/engine.hpp"
#include "fairheat/error.hpp"
#include "fairheat/metrics.hpp"
#include "fairheat/network.hpp"
#include "fairheat/scenario.hpp"
#include "fairheat/thermal.hpp"
#include "fairheat/weather.hpp"
