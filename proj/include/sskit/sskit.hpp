/*
 Copyright 2026 The statespace-kit Authors

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
#ifndef SSKIT_SSKIT_HPP
#define SSKIT_SSKIT_HPP

// Numerical core only; io.hpp and cli.hpp additionally need the vendored
// json.hpp and CLI11.hpp on the include path.
#include "builtins.hpp"
#include "lqr.hpp"
#include "minprin.hpp"
#include "model.hpp"
#include "numkit.hpp"
#include "realization.hpp"
#include "response.hpp"
#include "stability.hpp"
#include "structural.hpp"
#include "synthesis.hpp"

#endif  // SSKIT_SSKIT_HPP
