#pragma once

#include "salad/errors.hpp"
#include "salad/scaler.hpp"
#include "salad/lstm.hpp"
#include "salad/stats.hpp"
#include "salad/conversion.hpp"
#include "salad/detection.hpp"
#include "salad/alert.hpp"
#include "salad/point_csv.hpp"
#include "salad/pipeline.hpp"
#include "salad/evaluation.hpp"
#include "salad/formats.hpp"
#include "salad/synth.hpp"
#include "salad/gradcheck.hpp"
