#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ecograph {

/// Base class for every error the engine raises on a violated contract.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// graph-core
// ---------------------------------------------------------------------------

class InvalidDirectionCode : public Error {
public:
    using Error::Error;
};

class DirectionIntoNodata : public Error {
public:
    using Error::Error;
};

class EmptyGrid : public Error {
public:
    using Error::Error;
};

/// Raised when an ordering or coarsening encounters a directed cycle.
/// Carries the node set of one offending cycle.
class CycleDetected : public Error {
public:
    CycleDetected(const std::string& what, std::vector<int> cycle)
        : Error(what), cycle_nodes(std::move(cycle)) {}
    std::vector<int> cycle_nodes;
};

class IncompleteMap : public Error {
public:
    using Error::Error;
};

class UnknownMethod : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// state-data
// ---------------------------------------------------------------------------

class ParseError : public Error {
public:
    ParseError(const std::string& what, long line_no = -1)
        : Error(line_no >= 0 ? what + " (line " + std::to_string(line_no) + ")" : what),
          line(line_no) {}
    long line = -1;
};

class NonMonotonicDates : public Error {
public:
    using Error::Error;
};

class NegativePrecip : public Error {
public:
    using Error::Error;
};

class GraphMismatch : public Error {
public:
    using Error::Error;
};

class SchemaMismatch : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// autodiff
// ---------------------------------------------------------------------------

class DomainError : public Error {
public:
    using Error::Error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

class DetachedVariable : public Error {
public:
    using Error::Error;
};

class NonFiniteEvaluation : public Error {
public:
    using Error::Error;
};

class InvalidBounds : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// process updaters / simulator
// ---------------------------------------------------------------------------

class InvariantViolation : public Error {
public:
    using Error::Error;
};

class NonFiniteState : public Error {
public:
    using Error::Error;
};

class UnknownSoilClass : public Error {
public:
    using Error::Error;
};

class InsufficientHistory : public Error {
public:
    using Error::Error;
};

class AxisMismatch : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// training / distillation
// ---------------------------------------------------------------------------

class NonFiniteLoss : public Error {
public:
    NonFiniteLoss(const std::string& what, long at_epoch)
        : Error(what + " (epoch " + std::to_string(at_epoch) + ")"), epoch(at_epoch) {}
    long epoch = -1;
};

class ConstantObservations : public Error {
public:
    using Error::Error;
};

class ConstantSeries : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class DivergedOptimization : public Error {
public:
    using Error::Error;
};

class PairingMismatch : public Error {
public:
    using Error::Error;
};

class EmptyFinetuneSet : public Error {
public:
    using Error::Error;
};

class PreconditionViolation : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace ecograph
