/* Copyright (c) 2026 The resfu Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <stdexcept>
#include <string>

namespace resfu {

enum class Errc {
  BadMagic,
  UnsupportedVersion,
  TruncatedPayload,
  MalformedHeader,
  Io,
  ShapeMismatch,
  RatioMismatch,
  ChannelGroupMismatch,
  RowNotNormalized,
  NonFiniteValue,
  MissingEntry,
  InvalidArgument,
};

const char* errc_name(Errc code);

// Process exit status for a failure of this kind: 2 for IO and parse errors,
// 3 for shape and ratio errors.
int exit_code_for(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const char* what) {
  if (!cond) fail(code, what);
}

}  // namespace resfu
