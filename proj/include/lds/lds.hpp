#pragma once

#include "lds/core/dataset.hpp"
#include "lds/core/error.hpp"
#include "lds/core/rng.hpp"
#include "lds/core/types.hpp"
#include "lds/encoder/checkpoint.hpp"
#include "lds/encoder/embedding_store.hpp"
#include "lds/encoder/toy_encoder.hpp"
#include "lds/encoder/vocabulary.hpp"
#include "lds/gradcheck.hpp"
#include "lds/harness/ablate.hpp"
#include "lds/harness/backend.hpp"
#include "lds/harness/config.hpp"
#include "lds/harness/csv.hpp"
#include "lds/harness/evaluate.hpp"
#include "lds/harness/optimizer.hpp"
#include "lds/harness/stats.hpp"
#include "lds/harness/synth.hpp"
#include "lds/harness/train.hpp"
#include "lds/losses.hpp"
#include "lds/metalearners.hpp"
#include "lds/sampler.hpp"
#include "lds/scaler.hpp"
