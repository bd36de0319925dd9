#pragma once

// Reader and writer for the AMALTHEA-dialect XML documented in
// docs/amalthea-xml.md.

#include "autobench/model.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace autobench::xml {

enum class ErrorKind {
    Syntax,
    UnknownElement,
    MissingAttribute,
    BadReference,
    BadNumber,
    // Well-formed and resolvable, but breaks a model invariant (duplicate ID,
    // duplicate priority, BCET > WCET, ...).
    Constraint,
};

const char* to_string(ErrorKind kind);

// line and column are 1-based.
struct ParseError {
    int line = 0;
    int column = 0;
    ErrorKind kind = ErrorKind::Syntax;
    std::string message;
};

struct Warning {
    int line = 0;
    int column = 0;
    std::string message;
};

// Every error found in one pass over the document.
class ParseFailure : public std::runtime_error {
public:
    explicit ParseFailure(std::vector<ParseError> errors);
    const std::vector<ParseError>& errors() const { return errors_; }

private:
    std::vector<ParseError> errors_;
};

class InvalidModel : public std::runtime_error {
public:
    explicit InvalidModel(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

struct ParseResult {
    AmaltheaModel model;
    std::vector<Warning> warnings;
};

// The returned model always passes validate(). Throws ParseFailure.
ParseResult parse(std::string_view document);

// Throws std::runtime_error when the file cannot be read.
ParseResult parse_file(const std::filesystem::path& path);

// Deterministic: elements in model order, attributes in a fixed order.
// Throws InvalidModel when validate() reports anything.
std::string serialize(const AmaltheaModel& model);

}  // namespace autobench::xml
