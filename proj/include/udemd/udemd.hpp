#pragma once

#include "udemd/binary.hpp"
#include "udemd/diffusion.hpp"
#include "udemd/embedding.hpp"
#include "udemd/error.hpp"
#include "udemd/eval.hpp"
#include "udemd/experiments.hpp"
#include "udemd/generators.hpp"
#include "udemd/graph.hpp"
#include "udemd/metric.hpp"
#include "udemd/ot/calibration.hpp"
#include "udemd/ot/dense_lp.hpp"
#include "udemd/ot/network_simplex.hpp"
#include "udemd/ot/oracle.hpp"
#include "udemd/ot/sinkhorn.hpp"
#include "udemd/parallel.hpp"
#include "udemd/random.hpp"
#include "udemd/signal_io.hpp"
#include "udemd/signal_set.hpp"
#include "udemd/stats.hpp"

#define UDEMD_VERSION "0.1.0"
