#ifndef SVMPLAN_ERROR_HPP
#define SVMPLAN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace svmplan {

/// Base class of every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI and the HTTP service.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

#define SVMPLAN_DEFINE_ERROR(Name)                                             \
  class Name : public Error {                                                  \
  public:                                                                      \
    explicit Name(const std::string& what) : Error(#Name, what) {}             \
  }

// geodata
SVMPLAN_DEFINE_ERROR(ParseError);
SVMPLAN_DEFINE_ERROR(SchemaError);
SVMPLAN_DEFINE_ERROR(GeometryError);
SVMPLAN_DEFINE_ERROR(NoTerrainData);
SVMPLAN_DEFINE_ERROR(NonConvergence);

// dataset
SVMPLAN_DEFINE_ERROR(RangeError);
SVMPLAN_DEFINE_ERROR(InsufficientData);

// svm
SVMPLAN_DEFINE_ERROR(SingleClassData);
SVMPLAN_DEFINE_ERROR(DegenerateFeature);
SVMPLAN_DEFINE_ERROR(VersionMismatch);
SVMPLAN_DEFINE_ERROR(ChecksumError);
SVMPLAN_DEFINE_ERROR(TerrainClassMismatch);

// tuning
SVMPLAN_DEFINE_ERROR(NonTermination);
SVMPLAN_DEFINE_ERROR(FoldDegeneracy);

// planner
SVMPLAN_DEFINE_ERROR(LeakageError);
SVMPLAN_DEFINE_ERROR(EmptySubset);
SVMPLAN_DEFINE_ERROR(BindError);
SVMPLAN_DEFINE_ERROR(InvalidArgument);

#undef SVMPLAN_DEFINE_ERROR

} // namespace svmplan

#endif // SVMPLAN_ERROR_HPP
