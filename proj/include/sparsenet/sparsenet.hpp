#pragma once

#include "sparsenet/dag.hpp"
#include "sparsenet/data.hpp"
#include "sparsenet/errors.hpp"
#include "sparsenet/estimators/evaluate.hpp"
#include "sparsenet/estimators/forest.hpp"
#include "sparsenet/estimators/ols.hpp"
#include "sparsenet/estimators/svr.hpp"
#include "sparsenet/experiment.hpp"
#include "sparsenet/graph.hpp"
#include "sparsenet/metrics.hpp"
#include "sparsenet/records.hpp"
#include "sparsenet/report.hpp"
#include "sparsenet/rgg.hpp"
#include "sparsenet/rng.hpp"
#include "sparsenet/snn.hpp"
#include "sparsenet/stats.hpp"
