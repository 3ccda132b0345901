#ifndef BILATERAL_BILATERAL_HPP
#define BILATERAL_BILATERAL_HPP

#include "bilateral/adversaries.hpp"
#include "bilateral/experiment.hpp"
#include "bilateral/feedback_env.hpp"
#include "bilateral/game_json.hpp"
#include "bilateral/learners.hpp"
#include "bilateral/partial_monitoring.hpp"
#include "bilateral/rational.hpp"
#include "bilateral/rng.hpp"
#include "bilateral/trade_core.hpp"

#endif  // BILATERAL_BILATERAL_HPP
