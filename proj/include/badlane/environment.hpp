// Copyright 2026 The BadLane Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "badlane/image.hpp"

namespace badlane {

enum class EnvKind { none, sunlight, shadow, rain, snow };

inline constexpr EnvKind kWeatherKinds[] = {EnvKind::sunlight, EnvKind::shadow,
                                            EnvKind::rain, EnvKind::snow};

EnvKind parse_env_kind(std::string_view name);
std::string_view env_name(EnvKind kind);

struct EnvCondition {
  EnvKind kind = EnvKind::none;
  double intensity = 0.5;
  std::uint64_t seed = 0;
  bool operator==(const EnvCondition&) const = default;
};

// Deterministic photometric corruption. sunlight: additive radial glow;
// shadow: darkened random polygon; rain: translucent diagonal streaks;
// snow: white speckles. Intensity 0 and kind none are identities.
Image apply_condition(const Image& image, const EnvCondition& cond);

// Same recipe restricted to a w x h window at origin; pixels outside it are
// untouched.
Image apply_condition_in_region(const Image& image, const EnvCondition& cond,
                                PixelPos origin, int width, int height);

// Applies several conditions in the fixed order sunlight, shadow, rain, snow.
Image apply_conditions(const Image& image, std::span<const EnvCondition> conds);
Image apply_conditions_in_region(const Image& image, std::span<const EnvCondition> conds,
                                 PixelPos origin, int width, int height);

// Each weather kind is included independently with probability per_type_prob;
// an empty result is the normal environment.
std::vector<EnvCondition> sample_conditions(double per_type_prob, std::uint64_t seed,
                                            double intensity = 0.5);

// "sunlight+rain" style tag, "none" for an empty list.
std::string conditions_tag(std::span<const EnvCondition> conds);

}  // namespace badlane
