#pragma once

#include "marketsieve/adaptation.hpp"
#include "marketsieve/agreement.hpp"
#include "marketsieve/brown.hpp"
#include "marketsieve/canonical.hpp"
#include "marketsieve/conll.hpp"
#include "marketsieve/corpus.hpp"
#include "marketsieve/error.hpp"
#include "marketsieve/evaluation.hpp"
#include "marketsieve/experiments.hpp"
#include "marketsieve/features.hpp"
#include "marketsieve/learning.hpp"
#include "marketsieve/model_io.hpp"
#include "marketsieve/predictions.hpp"
#include "marketsieve/projection.hpp"
#include "marketsieve/stemmer.hpp"
#include "marketsieve/text.hpp"
