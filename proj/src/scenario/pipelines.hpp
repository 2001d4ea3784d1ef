#pragma once

#include <cstdint>

#include "regularframe/scenario.hpp"
#include "reader.hpp"

namespace regularframe::scenario::detail {

void run_chart(const Reader& r, Report& out);
void run_interpolate(const Reader& r, Report& out);
void run_evolve(const Reader& r, Report& out);
void run_transport(const Reader& r, Report& out);
void run_shell(const Reader& r, Report& out);
void run_fock(const Reader& r, Report& out);

}  // namespace regularframe::scenario::detail
