//===- Error.h - Error types ------------------------------------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef MERGELINK_ERROR_H
#define MERGELINK_ERROR_H

#include <stdexcept>
#include <string>

namespace mergelink {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised by the text readers; carries a 1-based source position.
class ParseError : public Error {
public:
  ParseError(unsigned Line, unsigned Col, const std::string &Msg)
      : Error(std::to_string(Line) + ":" + std::to_string(Col) + ": " + Msg),
        Line(Line), Col(Col) {}

  unsigned line() const { return Line; }
  unsigned column() const { return Col; }

private:
  unsigned Line;
  unsigned Col;
};

} // namespace mergelink

#endif // MERGELINK_ERROR_H
