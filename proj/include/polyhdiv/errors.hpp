// Exception types shared across the library. Every error carries a stable
// kind string so the CLI can emit machine-readable error records.
#pragma once

#include <stdexcept>
#include <string>

namespace polyhdiv {

class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(msg), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

private:
  std::string kind_;
};

#define POLYHDIV_DEFINE_ERROR(Name)                                          \
  class Name : public Error {                                                \
  public:                                                                    \
    explicit Name(const std::string& msg) : Error(#Name, msg) {}             \
  }

POLYHDIV_DEFINE_ERROR(GeometryError);
POLYHDIV_DEFINE_ERROR(MeshError);
POLYHDIV_DEFINE_ERROR(QuadratureError);
POLYHDIV_DEFINE_ERROR(SolveError);
POLYHDIV_DEFINE_ERROR(DomainError);
POLYHDIV_DEFINE_ERROR(AdmissibilityError);
POLYHDIV_DEFINE_ERROR(SpaceRankError);
POLYHDIV_DEFINE_ERROR(UnisolvenceError);
POLYHDIV_DEFINE_ERROR(UsageError);

#undef POLYHDIV_DEFINE_ERROR

}  // namespace polyhdiv
