// Copyright 2026 The cvsqueeze Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace cvsqueeze {

/// Named, seedable random stream. Gaussian variates use the polar
/// (Marsaglia) method rather than std::normal_distribution so the exact
/// sample sequence is fixed by this library, not by the standard library
/// implementation. Substreams for parallel tasks derive as seed ^ index,
/// scrambled through splitmix64 before seeding the engine.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed, std::string label = "main");

    /// Independent stream for task `index` (seed = base ^ index).
    RngStream substream(std::uint64_t index) const;

    double uniform();                       // [0, 1)
    double uniform(double lo, double hi);   // [lo, hi)
    double normal();                        // standard normal
    double normal(double mean, double stddev);

    std::uint64_t seed() const { return seed_; }
    const std::string &label() const { return label_; }

    /// Stream identifier recorded in measurement records, e.g. "mc#42/17".
    std::string describe() const;

  private:
    std::uint64_t seed_;
    std::string label_;
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

} // namespace cvsqueeze
