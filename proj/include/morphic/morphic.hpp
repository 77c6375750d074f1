/*
 * morphic - Cross-modal facial action unit supervision for event cameras.
 *
 * File: include/morphic/morphic.hpp
 *
 * Copyright 2026 The morphic authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#ifndef MORPHIC_MORPHIC_HPP_
#define MORPHIC_MORPHIC_HPP_

#include "morphic/common.hpp"
#include "morphic/events.hpp"
#include "morphic/model3dmm.hpp"
#include "morphic/fitting.hpp"
#include "morphic/crossmodal.hpp"
#include "morphic/synth.hpp"
#include "morphic/learn.hpp"

#endif /* MORPHIC_MORPHIC_HPP_ */
