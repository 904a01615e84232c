// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace helmdd {

inline constexpr const char* version_string = "helmdd 0.1.0";

}
