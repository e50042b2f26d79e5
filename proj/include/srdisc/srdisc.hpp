#pragma once

#include "srdisc/bayes.hpp"
#include "srdisc/csv.hpp"
#include "srdisc/errors.hpp"
#include "srdisc/information.hpp"
#include "srdisc/optics.hpp"
#include "srdisc/parallel.hpp"
#include "srdisc/quadrature.hpp"
#include "srdisc/rng.hpp"
#include "srdisc/singular.hpp"
#include "srdisc/testing.hpp"
