/*
 * Copyright 2026 The Noteworthy Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "noteworthy/annotation.hpp"
#include "noteworthy/catalog.hpp"
#include "noteworthy/concept_matcher.hpp"
#include "noteworthy/error.hpp"
#include "noteworthy/filter.hpp"
#include "noteworthy/linear.hpp"
#include "noteworthy/manifest.hpp"
#include "noteworthy/metrics.hpp"
#include "noteworthy/pipeline.hpp"
#include "noteworthy/synth.hpp"
#include "noteworthy/text_features.hpp"
#include "noteworthy/transcript.hpp"
#include "noteworthy/util.hpp"
