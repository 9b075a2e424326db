#pragma once
// Umbrella header: the whole library in one include.

#include "dsmetric/am.hpp"
#include "dsmetric/cantor.hpp"
#include "dsmetric/core.hpp"
#include "dsmetric/discretize.hpp"
#include "dsmetric/io.hpp"
#include "dsmetric/iso_quotient.hpp"
#include "dsmetric/metric_space.hpp"
#include "dsmetric/pipelines.hpp"
#include "dsmetric/relation.hpp"
#include "dsmetric/sft.hpp"
