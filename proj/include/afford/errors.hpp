// Copyright 2026 The Afford Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace afford {

// Base for every error the toolkit raises. `kind()` is the stable,
// machine-readable name used in the CLI's error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define AFFORD_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(#Name, what) {}  \
  };

// manifest
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error("ParseError", "line " + std::to_string(line) + ": " + reason),
        line_(line), reason_(reason) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class DuplicateId : public Error {
 public:
  explicit DuplicateId(const std::string& id)
      : Error("DuplicateId", "duplicate record id \"" + id + "\""), id_(id) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class UnsupportedVersion : public Error {
 public:
  explicit UnsupportedVersion(std::int64_t v)
      : Error("UnsupportedVersion",
              "unsupported manifest formatVersion " + std::to_string(v)),
        version_(v) {}
  std::int64_t version() const noexcept { return version_; }

 private:
  std::int64_t version_;
};

class SampleTooLarge : public Error {
 public:
  SampleTooLarge(std::size_t n, std::size_t available)
      : Error("SampleTooLarge", "requested " + std::to_string(n) +
                                    " records but only " +
                                    std::to_string(available) + " available"),
        n_(n), available_(available) {}
  std::size_t requested() const noexcept { return n_; }
  std::size_t available() const noexcept { return available_; }

 private:
  std::size_t n_, available_;
};

// maskops
AFFORD_DEFINE_ERROR(BadRle)
AFFORD_DEFINE_ERROR(OutOfBounds)
AFFORD_DEFINE_ERROR(DegeneratePolygon)
AFFORD_DEFINE_ERROR(SizeMismatch)

// metrics
AFFORD_DEFINE_ERROR(EmptyEvaluation)

// projection / graspgen
AFFORD_DEFINE_ERROR(InvalidDepth)
AFFORD_DEFINE_ERROR(BehindCamera)
AFFORD_DEFINE_ERROR(NonRigidTransform)

class TooFewPoints : public Error {
 public:
  TooFewPoints(std::size_t count, std::size_t min_points)
      : Error("TooFewPoints", "cloud has " + std::to_string(count) +
                                  " points, need at least " +
                                  std::to_string(min_points)),
        count_(count), min_points_(min_points) {}
  std::size_t count() const noexcept { return count_; }
  std::size_t min_points() const noexcept { return min_points_; }

 private:
  std::size_t count_, min_points_;
};

// instructions
class MarkerMissing : public Error {
 public:
  explicit MarkerMissing(const std::string& marker)
      : Error("MarkerMissing", "response lacks marker " + marker),
        marker_(marker) {}
  const std::string& marker() const noexcept { return marker_; }

 private:
  std::string marker_;
};

class HardConstraintViolated : public Error {
 public:
  explicit HardConstraintViolated(const std::string& token)
      : Error("HardConstraintViolated",
              "hard instruction mentions \"" + token + "\""),
        token_(token) {}
  const std::string& token() const noexcept { return token_; }

 private:
  std::string token_;
};

// predict / annotate
AFFORD_DEFINE_ERROR(NoMaskToken)
AFFORD_DEFINE_ERROR(BackendUnavailable)
AFFORD_DEFINE_ERROR(BackendError)
AFFORD_DEFINE_ERROR(PredictorFailure)
AFFORD_DEFINE_ERROR(IoError)
AFFORD_DEFINE_ERROR(UsageError)

#undef AFFORD_DEFINE_ERROR

}  // namespace afford
