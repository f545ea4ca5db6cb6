#pragma once

#include <string>

#include "mtdata/language.h"

namespace mtdata::eval {

struct EvalItem {
  Direction direction;
  std::string source;
  std::string hypothesis;
  std::string reference;  // never empty
};

}  // namespace mtdata::eval
