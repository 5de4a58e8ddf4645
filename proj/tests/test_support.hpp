#pragma once

#include "doctest.h"
#include "dho/error.hpp"

namespace dho::testing {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected dho::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace dho::testing
