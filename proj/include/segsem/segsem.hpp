#pragma once

#include "segsem/backend.hpp"
#include "segsem/config.hpp"
#include "segsem/error.hpp"
#include "segsem/gate.hpp"
#include "segsem/metrics.hpp"
#include "segsem/pgm.hpp"
#include "segsem/pipeline.hpp"
#include "segsem/raster.hpp"
#include "segsem/refine.hpp"
#include "segsem/report.hpp"
#include "segsem/rng.hpp"
#include "segsem/sauvola.hpp"
#include "segsem/synth.hpp"
