#pragma once

#include <stdexcept>
#include <string>

namespace novarch {

// All library failures derive from Error so callers can map them to exit codes.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- scalar arithmetic ---
struct ZeroInversion : Error {
    ZeroInversion() : Error("cannot invert zero (or an element with no visible terms at this precision)") {}
};

// --- valued linear algebra ---
struct PrecisionExhausted : Error {
    explicit PrecisionExhausted(const std::string& what) : Error("precision exhausted: " + what) {}
};

// --- complexes ---
struct NotAComplex : Error {
    explicit NotAComplex(const std::string& witness) : Error("d² != 0: " + witness) {}
};
struct GradingMismatch : Error {
    explicit GradingMismatch(const std::string& witness) : Error("differential does not raise degree by 1: " + witness) {}
};
struct NotChainMap : Error {
    explicit NotChainMap(const std::string& witness) : Error("map fails d∘κ = κ∘d: " + witness) {}
};
struct NotSubcomplex : Error {
    explicit NotSubcomplex(const std::string& witness) : Error("flagged generators do not span a subcomplex: " + witness) {}
};
struct NotAcyclic : Error {
    explicit NotAcyclic(const std::string& witness) : Error("flagged subcomplex has nonzero homology: " + witness) {}
};

// --- homological perturbation ---
struct PerturbationTooLarge : Error {
    explicit PerturbationTooLarge(const std::string& what) : Error("perturbation bound violated: " + what) {}
};
struct SeriesDiverged : Error {
    explicit SeriesDiverged(const std::string& what) : Error("perturbation series failed to settle: " + what) {}
};

// --- spectral sequences ---
struct Inconclusive : Error {
    explicit Inconclusive(const std::string& what) : Error("inconclusive at working precision: " + what) {}
};

// --- flux cones / tau ---
struct PointOutsidePolytope : Error {
    explicit PointOutsidePolytope(const std::string& what) : Error("point outside polytope: " + what) {}
};
struct ClassOutsideCone : Error {
    explicit ClassOutsideCone(const std::string& what) : Error("class outside cone: " + what) {}
};
struct DimensionTooLarge : Error {
    explicit DimensionTooLarge(const std::string& what) : Error("dimension above supported cap: " + what) {}
};
struct MapNotInjective : Error {
    explicit MapNotInjective(const std::string& what) : Error("map not injective: " + what) {}
};

// --- rigidity ---
struct NotClose : Error {
    explicit NotClose(const std::string& what) : Error("structures not close enough: " + what) {}
};
struct IterationStalled : Error {
    explicit IterationStalled(const std::string& what) : Error("fixed-point iteration stalled: " + what) {}
};
struct NotAlmostCommutative : Error {
    explicit NotAlmostCommutative(const std::string& what) : Error("square not almost-commutative: " + what) {}
};
struct ImageNotSpanning : Error {
    explicit ImageNotSpanning(const std::string& what) : Error("image does not span modulo the maximal ideal: " + what) {}
};
struct NoInitialObject : Error {
    explicit NoInitialObject(const std::string& what) : Error("diagram has no initial object: " + what) {}
};

// --- models ---
struct NotClosed : Error {
    explicit NotClosed(const std::string& what) : Error("input form is not closed: " + what) {}
};

// --- cli / io ---
struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error("parse error: " + what) {}
};
struct SchemaError : Error {
    explicit SchemaError(const std::string& what) : Error("schema error: " + what) {}
};
struct InvariantError : Error {
    explicit InvariantError(const std::string& what) : Error("invariant violation: " + what) {}
};

} // namespace novarch
