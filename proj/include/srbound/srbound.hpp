#pragma once

#include "srbound/algorithms.hpp"
#include "srbound/bounds.hpp"
#include "srbound/dag.hpp"
#include "srbound/dsl.hpp"
#include "srbound/errors.hpp"
#include "srbound/evaluate.hpp"
#include "srbound/experiments.hpp"
#include "srbound/fp_format.hpp"
#include "srbound/random.hpp"
#include "srbound/rational.hpp"
