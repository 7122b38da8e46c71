#pragma once

#include "llab/error.hpp"
#include "llab/io.hpp"
#include "llab/numeric.hpp"
#include "llab/rng.hpp"
#include "llab/sequence.hpp"
#include "llab/mean_model.hpp"
#include "llab/core_sequences.hpp"
#include "llab/constructions.hpp"
#include "llab/random_models.hpp"
#include "llab/beurling.hpp"
#include "llab/template_zeta.hpp"
#include "llab/zeta_lab.hpp"
