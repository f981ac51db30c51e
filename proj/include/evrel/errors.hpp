// Copyright 2026 The evrel Authors
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

#ifndef EVREL_ERRORS_HPP_
#define EVREL_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace evrel {

// Annotations (or deductions from them) are logically inconsistent.
class ConflictError : public std::runtime_error {
 public:
  ConflictError(int e1, int e3, std::string existing, std::string deduced,
                std::string what)
      : std::runtime_error(std::move(what)),
        e1_(e1),
        e3_(e3),
        existing_(std::move(existing)),
        deduced_(std::move(deduced)) {}

  int e1() const { return e1_; }
  int e3() const { return e3_; }
  const std::string& existing() const { return existing_; }
  const std::string& deduced() const { return deduced_; }

 private:
  int e1_;
  int e3_;
  std::string existing_;
  std::string deduced_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

// Prediction/gold document sets do not line up pair-for-pair.
class MismatchError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training loss became non-finite.
class DivergenceError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Decoding problem larger than the configured exact-search cap.
class CapExceeded : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A gold-labeled pair has no scores in the batch.
class MissingScore : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A loss term was asked to take log of a non-positive argument.
class DomainError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace evrel

#endif  // EVREL_ERRORS_HPP_
