#ifndef PAIRSHAP_ERRORS_HPP
#define PAIRSHAP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pairshap {

// Every library failure derives from Error. InputError covers malformed
// documents and violated guards (CLI exit code 2); NumericalError covers
// rank, convergence and overflow failures (CLI exit code 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* name() const noexcept = 0;
  virtual int exit_code() const noexcept = 0;
};

class InputError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

#define PAIRSHAP_DEFINE_ERROR(Name, Base)                            \
  class Name : public Base {                                         \
   public:                                                           \
    using Base::Base;                                                \
    const char* name() const noexcept override { return #Name; }     \
  }

PAIRSHAP_DEFINE_ERROR(SchemaError, InputError);
PAIRSHAP_DEFINE_ERROR(DimensionError, InputError);
PAIRSHAP_DEFINE_ERROR(DomainError, InputError);
PAIRSHAP_DEFINE_ERROR(SizeGuard, InputError);
PAIRSHAP_DEFINE_ERROR(PartitionError, InputError);
PAIRSHAP_DEFINE_ERROR(SpecError, InputError);

PAIRSHAP_DEFINE_ERROR(NonFiniteError, NumericalError);
PAIRSHAP_DEFINE_ERROR(SingularMatrix, NumericalError);
PAIRSHAP_DEFINE_ERROR(NoConvergence, NumericalError);
PAIRSHAP_DEFINE_ERROR(RankDeficient, NumericalError);

#undef PAIRSHAP_DEFINE_ERROR

}  // namespace pairshap

#endif  // PAIRSHAP_ERRORS_HPP
