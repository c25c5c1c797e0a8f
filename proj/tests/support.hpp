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
#ifndef SSKIT_TESTS_SUPPORT_HPP
#define SSKIT_TESTS_SUPPORT_HPP

#include <optional>

#include "sskit/error.hpp"

namespace testsupport {

/// Kind of the sskit::Error thrown by fn, or nullopt when nothing is thrown.
template <class Fn>
std::optional<sskit::ErrorKind> thrownKind(Fn&& fn) {
    try {
        fn();
    } catch (const sskit::Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

}  // namespace testsupport

#define EXPECT_SSKIT_ERROR(expr, kindName) \
    EXPECT_EQ(::testsupport::thrownKind([&] { (void)(expr); }), std::optional<sskit::ErrorKind>(sskit::ErrorKind::kindName))

#endif  // SSKIT_TESTS_SUPPORT_HPP
