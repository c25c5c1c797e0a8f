/*
 Copyright 2026 The statespace-kit Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef SSKIT_ERROR_HPP
#define SSKIT_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace sskit {

/// Every failure the library reports. The CLI maps each kind to a stable
/// string in its error report, so append new kinds at the end.
enum class ErrorKind {
    InvalidArgument,
    DimensionMismatch,
    NonSquare,
    BackendFailure,
    NotSymmetric,
    Overflow,
    SingularBasis,
    IllConditioned,
    NoConvergence,
    SingularJacobian,
    StepTooSmall,
    TrajectoryResidualTooLarge,
    SingularTransform,
    ImproperTransferFunction,
    RepeatedPoles,
    RepeatedPoleUnsupported,
    RankAmbiguous,
    RepeatedEigenvalues,
    IllConditionedVandermonde,
    NotDiagonalizable,
    SingularFundamental,
    NonFiniteState,
    SingularLyapunovOperator,
    InternalError,
    NonSquarePlant,
    DegeneratePencil,
    SingularGrammian,
    Uncontrollable,
    Unobservable,
    ConjugacyViolation,
    ProjectionFailed,
    RankDeficientC,
    SubpairUnobservable,
    ZeroAtOrigin,
    CommonFactor,
    SingularSylvester,
    FiniteEscape,
    RepeatedHamiltonianEigenvalues,
    AxisEigenvalue,
    NotStabilizable,
    NotDetectable,
    StableSpaceDefect,
    SingularPsi12,
    InvalidHorizon,
    OutOfRange,
    SchemaError,
};

[[nodiscard]] constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonSquare: return "NonSquare";
    case ErrorKind::BackendFailure: return "BackendFailure";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::SingularBasis: return "SingularBasis";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::StepTooSmall: return "StepTooSmall";
    case ErrorKind::TrajectoryResidualTooLarge: return "TrajectoryResidualTooLarge";
    case ErrorKind::SingularTransform: return "SingularTransform";
    case ErrorKind::ImproperTransferFunction: return "ImproperTransferFunction";
    case ErrorKind::RepeatedPoles: return "RepeatedPoles";
    case ErrorKind::RepeatedPoleUnsupported: return "RepeatedPoleUnsupported";
    case ErrorKind::RankAmbiguous: return "RankAmbiguous";
    case ErrorKind::RepeatedEigenvalues: return "RepeatedEigenvalues";
    case ErrorKind::IllConditionedVandermonde: return "IllConditionedVandermonde";
    case ErrorKind::NotDiagonalizable: return "NotDiagonalizable";
    case ErrorKind::SingularFundamental: return "SingularFundamental";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::SingularLyapunovOperator: return "SingularLyapunovOperator";
    case ErrorKind::InternalError: return "InternalError";
    case ErrorKind::NonSquarePlant: return "NonSquarePlant";
    case ErrorKind::DegeneratePencil: return "DegeneratePencil";
    case ErrorKind::SingularGrammian: return "SingularGrammian";
    case ErrorKind::Uncontrollable: return "Uncontrollable";
    case ErrorKind::Unobservable: return "Unobservable";
    case ErrorKind::ConjugacyViolation: return "ConjugacyViolation";
    case ErrorKind::ProjectionFailed: return "ProjectionFailed";
    case ErrorKind::RankDeficientC: return "RankDeficientC";
    case ErrorKind::SubpairUnobservable: return "SubpairUnobservable";
    case ErrorKind::ZeroAtOrigin: return "ZeroAtOrigin";
    case ErrorKind::CommonFactor: return "CommonFactor";
    case ErrorKind::SingularSylvester: return "SingularSylvester";
    case ErrorKind::FiniteEscape: return "FiniteEscape";
    case ErrorKind::RepeatedHamiltonianEigenvalues: return "RepeatedHamiltonianEigenvalues";
    case ErrorKind::AxisEigenvalue: return "AxisEigenvalue";
    case ErrorKind::NotStabilizable: return "NotStabilizable";
    case ErrorKind::NotDetectable: return "NotDetectable";
    case ErrorKind::StableSpaceDefect: return "StableSpaceDefect";
    case ErrorKind::SingularPsi12: return "SingularPsi12";
    case ErrorKind::InvalidHorizon: return "InvalidHorizon";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::SchemaError: return "SchemaError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

namespace detail {

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const char* what) {
    if (!cond) fail(kind, what);
}

}  // namespace detail
}  // namespace sskit

#endif  // SSKIT_ERROR_HPP
