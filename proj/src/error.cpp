#include "greensentry/error.hpp"

namespace greensentry {

ParseError::ParseError(std::string field, const std::string& what)
    : DataError("parse error in " + field + ": " + what), field_(std::move(field)) {}

IngestError::IngestError(std::size_t row, const std::string& what)
    : DataError("row " + std::to_string(row) + ": " + what), row_(row) {}

}  // namespace greensentry
