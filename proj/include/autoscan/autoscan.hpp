#pragma once

#include "autoscan/assignment.hpp"
#include "autoscan/cli.hpp"
#include "autoscan/completion.hpp"
#include "autoscan/config.hpp"
#include "autoscan/frontier.hpp"
#include "autoscan/geometry.hpp"
#include "autoscan/grid.hpp"
#include "autoscan/instance_io.hpp"
#include "autoscan/metrics.hpp"
#include "autoscan/pathing.hpp"
#include "autoscan/reconstruction.hpp"
#include "autoscan/render.hpp"
#include "autoscan/rng.hpp"
#include "autoscan/scene.hpp"
#include "autoscan/scheduler.hpp"
#include "autoscan/sensor.hpp"
#include "autoscan/trace.hpp"
#include "autoscan/types.hpp"
