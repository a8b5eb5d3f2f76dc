#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pfcat {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `row` is the 1-based physical line in the file
/// (the header is row 1).
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t row, const std::string& what)
      : Error(file + ":" + std::to_string(row) + ": " + what), file_(std::move(file)), row_(row) {}

  const std::string& file() const { return file_; }
  std::size_t row() const { return row_; }

 private:
  std::string file_;
  std::size_t row_;
};

/// Input that parses but breaks a model invariant. `ids()` names the
/// offending entities (unknown bus ids, duplicate ids, isolated buses...).
class ValidationError : public Error {
 public:
  enum class Kind { kInvalidValue, kDanglingReference, kDuplicateId, kDisconnected, kMissingInput };

  ValidationError(Kind kind, const std::string& what, std::vector<std::string> ids = {})
      : Error(what), kind_(kind), ids_(std::move(ids)) {}

  Kind kind() const { return kind_; }
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  Kind kind_;
  std::vector<std::string> ids_;
};

/// Removing a line would split the network. `separated_buses` are the bus
/// ids no longer connected to the slack bus.
class IslandingError : public Error {
 public:
  IslandingError(std::string line_id, std::vector<std::string> separated_buses)
      : Error("outage of line " + line_id + " islands " + std::to_string(separated_buses.size()) +
              " bus(es)"),
        line_id_(std::move(line_id)),
        separated_(std::move(separated_buses)) {}

  const std::string& line_id() const { return line_id_; }
  const std::vector<std::string>& separated_buses() const { return separated_; }

 private:
  std::string line_id_;
  std::vector<std::string> separated_;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace pfcat
