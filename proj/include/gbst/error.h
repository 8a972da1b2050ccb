#ifndef GBST_ERROR_H_
#define GBST_ERROR_H_

#include <stdexcept>
#include <string>

namespace gbst {

/*! \brief base class of all errors raised by the library */
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/*! \brief malformed or inconsistent input data (bad CSV, labels, widths) */
class DataError : public Error {
 public:
  using Error::Error;
};

/*! \brief invalid hyper-parameters or API misuse */
class ParamError : public Error {
 public:
  using Error::Error;
};

}  // namespace gbst

#endif  // GBST_ERROR_H_
