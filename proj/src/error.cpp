// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#include "rooflinesim/error.hpp"

namespace rooflinesim
{

std::string_view to_string(ErrorKind kind)
{
    switch (kind)
    {
        case ErrorKind::Precondition: return "Precondition";
        case ErrorKind::ZeroPower: return "ZeroPower";
        case ErrorKind::VariantRange: return "VariantRange";
        case ErrorKind::Parse: return "Parse";
        case ErrorKind::DuplicateName: return "DuplicateName";
        case ErrorKind::UnknownName: return "UnknownName";
        case ErrorKind::MissingColumn: return "MissingColumn";
        case ErrorKind::BadNumber: return "BadNumber";
        case ErrorKind::InsufficientData: return "InsufficientData";
        case ErrorKind::DegenerateWindow: return "DegenerateWindow";
        case ErrorKind::MissingEndpoint: return "MissingEndpoint";
        case ErrorKind::Overflow: return "Overflow";
        case ErrorKind::InconsistentNodes: return "InconsistentNodes";
        case ErrorKind::Unsupported: return "Unsupported";
        case ErrorKind::MissingPlacement: return "MissingPlacement";
        case ErrorKind::UnknownTier: return "UnknownTier";
        case ErrorKind::Unsatisfiable: return "Unsatisfiable";
        case ErrorKind::ZeroLifetime: return "ZeroLifetime";
        case ErrorKind::UnknownAxis: return "UnknownAxis";
    }
    return "Unknown";
}

}  // namespace rooflinesim
