#pragma once

#include "tlsscope/units.hpp"
#include "tlsscope/errors.hpp"
#include "tlsscope/stm.hpp"
#include "tlsscope/matrix.hpp"
#include "tlsscope/eigen.hpp"
#include "tlsscope/coupled.hpp"
#include "tlsscope/lm.hpp"
#include "tlsscope/rng.hpp"
#include "tlsscope/parallel.hpp"
#include "tlsscope/ensemble.hpp"
#include "tlsscope/dataset.hpp"
#include "tlsscope/serialize.hpp"
#include "tlsscope/dataset_io.hpp"
#include "tlsscope/traces.hpp"
#include "tlsscope/hyperbola_fit.hpp"
#include "tlsscope/classify.hpp"
#include "tlsscope/coupled_fit.hpp"
#include "tlsscope/metrics.hpp"
#include "tlsscope/pipeline.hpp"
