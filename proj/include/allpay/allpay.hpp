#pragma once

#include "allpay/analysis.hpp"
#include "allpay/beliefs.hpp"
#include "allpay/errors.hpp"
#include "allpay/model.hpp"
#include "allpay/qre.hpp"
#include "allpay/race.hpp"
