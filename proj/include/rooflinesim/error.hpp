// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rooflinesim
{

enum class ErrorKind
{
    Precondition,
    ZeroPower,
    VariantRange,
    Parse,
    DuplicateName,
    UnknownName,
    MissingColumn,
    BadNumber,
    InsufficientData,
    DegenerateWindow,
    MissingEndpoint,
    Overflow,
    InconsistentNodes,
    Unsupported,
    MissingPlacement,
    UnknownTier,
    Unsatisfiable,
    ZeroLifetime,
    UnknownAxis,
};

std::string_view to_string(ErrorKind kind);

// All library failures surface as this type. `field()` carries a dotted
// config path (e.g. "model.layers") when the failure is tied to an input field.
class Error : public std::runtime_error
{
   public:
    Error(ErrorKind kind, const std::string &message, std::string field = {}) :
        std::runtime_error(message), kind_(kind), field_(std::move(field))
    {
    }

    ErrorKind kind() const { return kind_; }
    const std::string &field() const { return field_; }

   private:
    ErrorKind kind_;
    std::string field_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &message, std::string field = {})
{
    throw Error(kind, message, std::move(field));
}

inline void require(bool condition, const std::string &message, std::string field = {})
{
    if (!condition)
        fail(ErrorKind::Precondition, message, std::move(field));
}

}  // namespace rooflinesim
