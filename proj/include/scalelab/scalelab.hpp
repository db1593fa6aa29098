#pragma once

#include "scalelab/version.hpp"
#include "scalelab/errors.hpp"
#include "scalelab/numerics/matrix.hpp"
#include "scalelab/numerics/linalg.hpp"
#include "scalelab/numerics/distributions.hpp"
#include "scalelab/dataset.hpp"
#include "scalelab/pareto.hpp"
#include "scalelab/ols.hpp"
#include "scalelab/bootstrap.hpp"
#include "scalelab/diagnostics.hpp"
#include "scalelab/powerlaw.hpp"
#include "scalelab/trends.hpp"
#include "scalelab/report.hpp"
#include "scalelab/analysis.hpp"
