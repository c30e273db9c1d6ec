#pragma once

#include "checkpoint.hpp"
#include "corpus.hpp"
#include "diagnostics.hpp"
#include "entity_detector.hpp"
#include "error.hpp"
#include "evaluation.hpp"
#include "event_extractor.hpp"
#include "features.hpp"
#include "gradcheck.hpp"
#include "gru.hpp"
#include "layers.hpp"
#include "model.hpp"
#include "random.hpp"
#include "synthetic.hpp"
#include "tensor.hpp"
#include "training.hpp"
