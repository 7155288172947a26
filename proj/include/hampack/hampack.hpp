#pragma once

#include "hampack/types.hpp"
#include "hampack/rng.hpp"
#include "hampack/digraph.hpp"
#include "hampack/model.hpp"
#include "hampack/partition.hpp"
#include "hampack/permutation.hpp"
#include "hampack/matching.hpp"
#include "hampack/cover.hpp"
#include "hampack/patch.hpp"
#include "hampack/verify.hpp"
#include "hampack/harness.hpp"
#include "hampack/stats.hpp"
