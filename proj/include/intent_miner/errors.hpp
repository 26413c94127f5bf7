#pragma once

#include <stdexcept>
#include <string>

namespace im {

// Bad input data or configuration. CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed file content. Carries a 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, long line = 0)
        : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

// Filesystem trouble (missing file, unwritable path). CLI exit code 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Query for a word the model never saw.
class OovError : public std::runtime_error {
public:
    explicit OovError(const std::string& word)
        : std::runtime_error("out-of-vocabulary word: \"" + word + "\""), word_(word) {}
    const std::string& word() const { return word_; }

private:
    std::string word_;
};

// Non-finite loss during SGD.
class TrainingDivergedError : public std::runtime_error {
public:
    TrainingDivergedError(int epoch, long long pair_index)
        : std::runtime_error("training diverged: non-finite loss at epoch " +
                             std::to_string(epoch) + ", pair " + std::to_string(pair_index)),
          epoch_(epoch), pair_index_(pair_index) {}
    int epoch() const { return epoch_; }
    long long pair_index() const { return pair_index_; }

private:
    int epoch_;
    long long pair_index_;
};

}  // namespace im
