#pragma once

#include "acquisition.hpp"
#include "benchmarks.hpp"
#include "bo.hpp"
#include "bounds.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "gp.hpp"
#include "kernel.hpp"
#include "local_search.hpp"
#include "nelder_mead.hpp"
#include "parallel.hpp"
#include "qmc.hpp"
#include "rff.hpp"
#include "srgp.hpp"
#include "stats.hpp"
#include "transform.hpp"
