#pragma once

#include <stdexcept>
#include <string>

namespace rydpol {

// Root-search windows did not bracket the requested crossing.
struct NoCrossing : std::runtime_error {
    explicit NoCrossing(const std::string& what) : std::runtime_error(what) {}
};

// The operating-point constraints cannot be satisfied (e.g. zeta < 1).
struct Infeasible : std::runtime_error {
    explicit Infeasible(const std::string& what) : std::runtime_error(what) {}
};

// The averaged conditional phase never reaches the requested value.
struct NoRoot : std::runtime_error {
    explicit NoRoot(const std::string& what) : std::runtime_error(what) {}
};

// A state construction would exceed unit norm.
struct NonPhysical : std::runtime_error {
    explicit NonPhysical(const std::string& what) : std::runtime_error(what) {}
};

// Single-qubit compensations may only maintain or attenuate intensities.
struct GainForbidden : std::runtime_error {
    explicit GainForbidden(const std::string& what) : std::runtime_error(what) {}
};

struct MissingSetting : std::runtime_error {
    explicit MissingSetting(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroCoincidences : std::runtime_error {
    explicit ZeroCoincidences(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroPower : std::runtime_error {
    explicit ZeroPower(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rydpol
