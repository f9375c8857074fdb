#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace limkit {

// Failure classes. The numeric value doubles as the CLI exit code:
// 1 usage, 2 parse/input, 3 degenerate math, 4 io.
enum class ErrorClass : int {
    Usage = 1,
    Parse = 2,
    Math = 3,
    Io = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, std::string message)
        : std::runtime_error(std::move(message)), class_(cls) {}

    ErrorClass error_class() const noexcept { return class_; }
    int exit_code() const noexcept { return static_cast<int>(class_); }

private:
    ErrorClass class_;
};

struct EmptyLog : Error {
    EmptyLog() : Error(ErrorClass::Parse, "log is empty (no samples or no epochs)") {}
};

struct DegenerateAverage : Error {
    DegenerateAverage()
        : Error(ErrorClass::Math,
                "average curve is saturated at 1 in every epoch; alignment score undefined") {}
};

struct TooFewEpochs : Error {
    explicit TooFewEpochs(std::size_t k)
        : Error(ErrorClass::Math,
                "linear score needs at least 2 epochs, got " + std::to_string(k)) {}
};

struct CountExceedsPopulation : Error {
    CountExceedsPopulation(std::size_t count, std::size_t population)
        : Error(ErrorClass::Usage, "requested " + std::to_string(count) +
                                       " samples from a population of " +
                                       std::to_string(population)) {}
};

struct BudgetExceedsPopulation : Error {
    BudgetExceedsPopulation(std::size_t budget, std::size_t population)
        : Error(ErrorClass::Usage, "budget " + std::to_string(budget) +
                                       " exceeds population " + std::to_string(population)) {}
};

struct EmptyRollouts : Error {
    EmptyRollouts() : Error(ErrorClass::Parse, "pass rate of an empty rollout sequence") {}
};

// Ingestion rejections. Every one carries the 1-based line number of the
// offending (or first relevant) record.
struct ParseError : Error {
    ParseError(std::size_t line, const std::string& detail)
        : Error(ErrorClass::Parse, "line " + std::to_string(line) + ": " + detail), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct ValueOutOfRange : ParseError {
    ValueOutOfRange(std::size_t line, const std::string& detail) : ParseError(line, detail) {}
};

struct DuplicateRecord : ParseError {
    DuplicateRecord(std::size_t line, const std::string& sample_id, int epoch)
        : ParseError(line, "duplicate record for sample '" + sample_id + "' epoch " +
                               std::to_string(epoch)) {}
};

struct RaggedLog : ParseError {
    RaggedLog(std::size_t line, const std::string& sample_id, int expected_epochs,
              int found_epochs)
        : ParseError(line, "ragged log: sample '" + sample_id + "' covers " +
                               std::to_string(found_epochs) + " epoch(s), expected 1.." +
                               std::to_string(expected_epochs)) {}
};

struct InconsistentRollouts : ParseError {
    InconsistentRollouts(std::size_t line, const std::string& sample_id, int expected, int found)
        : ParseError(line, "sample '" + sample_id + "' changes rollout count from " +
                               std::to_string(expected) + " to " + std::to_string(found)) {}
};

struct IoError : Error {
    explicit IoError(const std::string& detail) : Error(ErrorClass::Io, detail) {}
};

}  // namespace limkit
