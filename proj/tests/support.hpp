#pragma once

#include "oslsim/generators.hpp"

namespace osl {
namespace testing = gen;
}  // namespace osl
