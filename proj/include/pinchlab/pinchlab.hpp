#pragma once

#include "circle_map.hpp"
#include "config.hpp"
#include "cocycle.hpp"
#include "disintegration.hpp"
#include "errors.hpp"
#include "exponent.hpp"
#include "fiber_measure.hpp"
#include "holonomy.hpp"
#include "io.hpp"
#include "markov.hpp"
#include "parallel.hpp"
#include "pinch.hpp"
#include "pipeline.hpp"
#include "presets.hpp"
#include "states.hpp"
#include "symbolic.hpp"
