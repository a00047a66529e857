/*
 * Copyright 2026 The box3d Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
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

namespace box3d {

enum class ErrorKind {
  Input,     // malformed or inconsistent input data
  Config,    // a tunable is out of its documented range
  Io,        // file could not be opened / written
  Geometry,  // precondition violated on a geometric primitive
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_input(const std::string& what) { throw Error(ErrorKind::Input, what); }
[[noreturn]] inline void throw_config(const std::string& what) { throw Error(ErrorKind::Config, what); }
[[noreturn]] inline void throw_io(const std::string& what) { throw Error(ErrorKind::Io, what); }
[[noreturn]] inline void throw_geometry(const std::string& what) { throw Error(ErrorKind::Geometry, what); }

}  // namespace box3d
