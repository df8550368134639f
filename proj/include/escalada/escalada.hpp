// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Escalada Authors

#pragma once

#include "escalada/classifier.hpp"
#include "escalada/error.hpp"
#include "escalada/escalation.hpp"
#include "escalada/lm.hpp"
#include "escalada/metrics.hpp"
#include "escalada/oov_monitor.hpp"
#include "escalada/prediction.hpp"
#include "escalada/prediction_dump.hpp"
#include "escalada/spell.hpp"
#include "escalada/bench/dataset.hpp"
#include "escalada/bench/desk_corpus.hpp"
#include "escalada/bench/experiments.hpp"
#include "escalada/bench/exports.hpp"
#include "escalada/bench/misspell.hpp"
#include "escalada/bench/splits.hpp"
