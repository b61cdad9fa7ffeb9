#ifndef FMCHAN_ERRORS_HPP
#define FMCHAN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fmchan {

// Shape/rank violations and misuse of typed containers.
class StructuralError : public std::runtime_error {
public:
    explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

// Argument outside the mathematical domain of an operation.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed on-disk artifact. Carries the byte offset where parsing failed.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t byte_offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(byte_offset) + ")"),
          offset(byte_offset) {}
    std::size_t offset;
};

// Non-finite loss or gradient during optimization. Carries the failing step.
class TrainingError : public std::runtime_error {
public:
    TrainingError(const std::string& what, long step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step(step) {}
    long step;
};

// Non-finite iterate inside an iterative solver. Carries the failing iteration.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, long iteration)
        : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
          iteration(iteration) {}
    long iteration;
};

// Request exceeds a deliberate size guard.
class CapabilityError : public std::runtime_error {
public:
    explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace fmchan

#endif
