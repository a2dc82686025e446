#ifndef BLOCH_ERRORS_HPP
#define BLOCH_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace bloch {

// Base for every error raised by the library. code() is a stable
// machine-readable tag used by the CLI summaries.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

// Topological obstructions are expected physical outcomes, not crashes.
// The CLI maps them to exit code 2.
class TopologyObstruction : public Error {
public:
    using Error::Error;
};

class NonHermitian : public Error {
public:
    explicit NonHermitian(const std::string& what) : Error("NonHermitian", what) {}
};

class NoConvergence : public Error {
public:
    explicit NoConvergence(const std::string& what) : Error("NoConvergence", what) {}
};

class RankDeficient : public Error {
public:
    RankDeficient(double sigma_min, const std::string& what)
        : Error("RankDeficient", what), sigma_min(sigma_min) {}
    double sigma_min;
};

class BranchCut : public Error {
public:
    BranchCut(double phase, const std::string& what)
        : Error("BranchCut", what), phase(phase) {}
    double phase;
};

class InvalidParams : public Error {
public:
    explicit InvalidParams(const std::string& what) : Error("InvalidParams", what) {}
};

class GapClosed : public Error {
public:
    GapClosed(double gap, const std::string& what) : Error("GapClosed", what), gap(gap) {}
    double gap;
};

class AliasedPhase : public Error {
public:
    AliasedPhase(double step, const std::string& what)
        : Error("AliasedPhase", what), step(step) {}
    double step;
};

class NonIntegerResidual : public Error {
public:
    NonIntegerResidual(double residual, const std::string& what)
        : Error("NonIntegerResidual", what), residual(residual) {}
    double residual;
};

class EigenvalueCollision : public Error {
public:
    explicit EigenvalueCollision(const std::string& what)
        : Error("EigenvalueCollision", what) {}
};

class NoSafeVector : public Error {
public:
    NoSafeVector(double margin, const std::string& what)
        : Error("NoSafeVector", what), margin(margin) {}
    double margin;
};

class PhaseUnwrapInconsistent : public Error {
public:
    explicit PhaseUnwrapInconsistent(const std::string& what)
        : Error("PhaseUnwrapInconsistent", what) {}
};

class IncompleteShells : public Error {
public:
    explicit IncompleteShells(const std::string& what) : Error("IncompleteShells", what) {}
};

class ParseError : public Error {
public:
    ParseError(long line, const std::string& reason)
        : Error("ParseError", "parse error at line " + std::to_string(line) + ": " + reason),
          line(line) {}
    long line;
};

class CountMismatch : public Error {
public:
    explicit CountMismatch(const std::string& what) : Error("CountMismatch", what) {}
};

class MissingNeighbor : public Error {
public:
    explicit MissingNeighbor(const std::string& what) : Error("MissingNeighbor", what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("IoError", what) {}
};

// Per-eigenvalue winding numbers block the logarithm gauge.
class EigenvalueWinding : public TopologyObstruction {
public:
    EigenvalueWinding(std::vector<int> windings, const std::string& what)
        : TopologyObstruction("EigenvalueWinding", what), windings(std::move(windings)) {}
    std::vector<int> windings;
};

// Nonzero winding of det V along the loop (or along a boundary loop of a
// surface); forbids any contraction to the identity.
class WindingObstruction : public TopologyObstruction {
public:
    WindingObstruction(std::vector<int> m, const std::string& what)
        : TopologyObstruction("WindingObstruction", what), m(std::move(m)) {}
    std::vector<int> m;
};

// Nonvanishing Chern number: no periodic frame exists at all.
class ChernObstruction : public TopologyObstruction {
public:
    ChernObstruction(std::vector<int> chern, const std::string& what)
        : TopologyObstruction("ChernObstruction", what), chern(std::move(chern)) {}
    std::vector<int> chern;
};

} // namespace bloch

#endif
