/*
 * Copyright 2026 The smeval Authors.
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

#ifndef SMEVAL_ERROR_HPP_
#define SMEVAL_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace smeval {

// Runtime failure (I/O, transport, cache miss). CLI exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or input that fails validation. CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A metric is mathematically undefined for the given input.
class MetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace smeval

#endif  // SMEVAL_ERROR_HPP_
