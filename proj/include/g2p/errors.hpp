#pragma once

#include <stdexcept>
#include <string>

namespace g2p {

// Base class for everything this library throws on purpose.
class G2pError : public std::runtime_error {
 public:
  explicit G2pError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input files (lexicon, corpus, manifest, alphabet).
class ParseError : public G2pError {
 public:
  ParseError(const std::string& msg, int line, int column)
      : G2pError(msg + " (line " + std::to_string(line) + ", column " +
                 std::to_string(column) + ")"),
        line(line),
        column(column) {}
  int line;
  int column;
};

// Invalid data handed to an operation (bad shapes excluded, see ShapeError).
class DataError : public G2pError {
 public:
  explicit DataError(const std::string& msg) : G2pError(msg) {}
};

// Tensor shape mismatch; message names the op and both shapes.
class ShapeError : public G2pError {
 public:
  explicit ShapeError(const std::string& msg) : G2pError(msg) {}
};

// Checkpoint load/save problems: bad magic, version, fingerprint, truncation.
class CheckpointError : public G2pError {
 public:
  explicit CheckpointError(const std::string& msg) : G2pError(msg) {}
};

}  // namespace g2p
