#pragma once

#include "netcv/block_models.hpp"
#include "netcv/clustering.hpp"
#include "netcv/edge_list.hpp"
#include "netcv/estimators.hpp"
#include "netcv/graph.hpp"
#include "netcv/harness.hpp"
#include "netcv/json_io.hpp"
#include "netcv/matching.hpp"
#include "netcv/ncv.hpp"
#include "netcv/parallel.hpp"
#include "netcv/random.hpp"
#include "netcv/spectral.hpp"
#include "netcv/svd.hpp"
