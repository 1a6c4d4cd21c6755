#pragma once

#include "lsbeta/affinity.hpp"
#include "lsbeta/beta_layer.hpp"
#include "lsbeta/chain_io.hpp"
#include "lsbeta/config.hpp"
#include "lsbeta/config_io.hpp"
#include "lsbeta/covariates.hpp"
#include "lsbeta/delimited.hpp"
#include "lsbeta/error.hpp"
#include "lsbeta/lsirm.hpp"
#include "lsbeta/model_eval.hpp"
#include "lsbeta/numerics.hpp"
#include "lsbeta/pipeline.hpp"
#include "lsbeta/postprocess.hpp"
#include "lsbeta/reports.hpp"
#include "lsbeta/rng.hpp"
#include "lsbeta/sampler.hpp"
#include "lsbeta/synthetic.hpp"
#include "lsbeta/votes.hpp"
