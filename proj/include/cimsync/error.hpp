/*
 * Copyright 2026 The cimsync Authors
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

#include <stdexcept>
#include <string>

namespace cimsync {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input (model file, cfg file, arch config).
class ParseError : public Error {
public:
    ParseError(int line, const std::string& field, const std::string& what)
        : Error("line " + std::to_string(line) + ", field '" + field + "': " + what),
          line_(line),
          field_(field) {}

    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    int line_;
    std::string field_;
};

/// Binary payload whose length does not match what the description declares.
class SizeError : public Error {
public:
    using Error::Error;
};

class UnsupportedOpError : public Error {
public:
    using Error::Error;
};

/// Shape invariant violation (channel mismatch, empty output, bad stride).
class ShapeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Shared-memory regions that overlap or cannot hold their contents.
class LayoutError : public Error {
public:
    using Error::Error;
};

class CapacityError : public Error {
public:
    using Error::Error;
};

/// bin/cfg images that disagree with each other or with the architecture.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// A metric whose denominator is zero.
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

/// A program performed an operation the machine cannot execute.
class ExecutionError : public Error {
public:
    using Error::Error;
};

}  // namespace cimsync
