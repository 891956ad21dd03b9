#pragma once

#include "chn2/chains.hpp"
#include "chn2/geometry.hpp"
#include "chn2/hierarchy.hpp"
#include "chn2/io.hpp"
#include "chn2/pointprocess.hpp"
#include "chn2/spatial_index.hpp"
#include "chn2/stats.hpp"
