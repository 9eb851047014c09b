/*
 Copyright 2026 The COCA Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef COCA_COCA_HPP
#define COCA_COCA_HPP

#include "coca/common.hpp"
#include "coca/linsys.hpp"
#include "coca/feedback.hpp"
#include "coca/dac.hpp"
#include "coca/coco.hpp"
#include "coca/controller.hpp"
#include "coca/metrics.hpp"
#include "coca/bench.hpp"

#endif  // COCA_COCA_HPP
