/**
 * @file error.hpp
 * @brief Exception hierarchy shared by every sigclass module.
 */
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sigclass {

/// Root of all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input (CSV rows, scene files, configs).
class InputError : public Error {
 public:
  using Error::Error;
};

class MalformedRow : public InputError {
 public:
  MalformedRow(std::size_t line_no, const std::string& what)
      : InputError("malformed row at line " + std::to_string(line_no) + ": " + what), line_no_(line_no) {}
  [[nodiscard]] std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

class RangeViolation : public InputError {
 public:
  RangeViolation(std::size_t line_no, std::string field)
      : InputError("value out of range at line " + std::to_string(line_no) + ", field " + field),
        line_no_(line_no),
        field_(std::move(field)) {}
  [[nodiscard]] std::size_t line_no() const noexcept { return line_no_; }
  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_no_;
  std::string field_;
};

class DuplicateKey : public InputError {
 public:
  DuplicateKey(double epoch, std::string sat_id)
      : InputError("duplicate (epoch, sat_id) key: (" + std::to_string(epoch) + ", " + sat_id + ")"),
        epoch_(epoch),
        sat_id_(std::move(sat_id)) {}
  [[nodiscard]] double epoch() const noexcept { return epoch_; }
  [[nodiscard]] const std::string& sat_id() const noexcept { return sat_id_; }

 private:
  double epoch_;
  std::string sat_id_;
};

class UnsortedStream : public InputError {
 public:
  explicit UnsortedStream(const std::string& which) : InputError(which + " stream is not sorted by epoch") {}
};

class SceneError : public InputError {
 public:
  using InputError::InputError;
};

/// A requested per-class quota exceeds what the data holds.
class InsufficientClassSamples : public Error {
 public:
  InsufficientClassSamples(const std::string& cls, std::size_t wanted, std::size_t available)
      : Error("insufficient samples for class " + cls + ": wanted " + std::to_string(wanted) + ", have " +
              std::to_string(available)) {}
};

class EmptyDataset : public Error {
 public:
  EmptyDataset() : Error("dataset is empty") {}
};

class EmptyNode : public Error {
 public:
  EmptyNode() : Error("impurity of an empty node is undefined") {}
};

class TooFewSamples : public Error {
 public:
  TooFewSamples(const std::string& cls, std::size_t have, std::size_t k)
      : Error("class " + cls + " has " + std::to_string(have) + " samples, fewer than k=" + std::to_string(k)) {}
};

class CorruptModel : public Error {
 public:
  explicit CorruptModel(const std::string& reason) : Error("corrupt model: " + reason) {}
};

}  // namespace sigclass
