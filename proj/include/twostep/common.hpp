#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace twostep {

using TermId = std::uint32_t;
using DocId = std::uint32_t;
using Impact = std::uint8_t;

constexpr DocId kInvalidDocId = std::numeric_limits<DocId>::max();

// Input/parse problems the caller can act on (exit code 2 in the CLI).
class InputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ParseError : public InputError {
  public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : InputError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

class IoError : public InputError {
  public:
    using InputError::InputError;
};

// Index persistence failures, kept distinct so tests can tell them apart.
class IndexFormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class IndexVersionError : public IndexFormatError {
  public:
    using IndexFormatError::IndexFormatError;
};

class IndexTruncatedError : public IndexFormatError {
  public:
    using IndexFormatError::IndexFormatError;
};

class IndexChecksumError : public IndexFormatError {
  public:
    using IndexFormatError::IndexFormatError;
};

}  // namespace twostep
