#pragma once

#include <map>
#include <string>

#include "breakpoint/repo_model.hpp"

namespace breakpoint {

/// Operator and operand tallies of a unit body. Keys are the taxonomy labels
/// ("=", "()", "u-", "not in", ...) for operators and source text for operands.
struct HalsteadCounts {
  std::map<std::string, int> operators;
  std::map<std::string, int> operands;

  int distinct_operators() const { return static_cast<int>(operators.size()); }
  int distinct_operands() const { return static_cast<int>(operands.size()); }
  int total_operators() const;
  int total_operands() const;
};

struct Halstead {
  double difficulty = 0.0;
  double volume = 0.0;
};

struct Complexity {
  int loc = 0;
  int cyclomatic = 1;
  Halstead halstead;
  int nesting_depth = 0;
};

// All four measures look at the body only: the signature (with decorators and
// parameters) and the docstring are excluded.
//
// Cyclomatic decision points: if, elif, for/async for, while, except
// handlers, conditional expressions, each `and`/`or`, each comprehension
// `for` and `if`, and every match case other than an unguarded `case _`.
//
// Nesting: if/for/while/try/with/match and nested def/class open a level;
// `elif` stays on the level of its `if`, `case` does not add one.
//
// Halstead operators:
//   =  (once per assignment target; annotated assignment only with a value)
//   augmented operators (+=, ...), :=, binary operators, u+ u- u~ not,
//   and/or (n-1 per chain), comparison operators (each, incl. "not in", "is not"),
//   () per call, [] per subscript, : per slice, . per attribute access,
//   if-else, lambda, await, yield, yield from, * (starred), ** (double star),
//   return, raise, from (raise cause), del, assert, if, elif, while,
//   for / async for (statements and comprehensions), comprehension if,
//   with / async with, except, def / async def / class (nested),
//   import, from-import, match, case, case guard "if", as (capture pattern),
//   | (pattern alternatives).
// Operands: names, literals (by source text), attribute names, keyword
// argument names, imported names (the alias when given), except-as names,
// nested def/class names. Not counted: parameters, decorators, docstrings,
// global/nonlocal/pass/break/continue/try/else/finally.
HalsteadCounts halstead_counts(const FunctionUnit& unit);
Halstead halstead(const FunctionUnit& unit);
Halstead halstead_from_counts(const HalsteadCounts& counts);

/// Body lines holding at least one non-comment token.
int count_code_lines(const FunctionUnit& unit);
int cyclomatic_complexity(const FunctionUnit& unit);
int nesting_depth(const FunctionUnit& unit);

/// All measures from a single parse of the unit.
Complexity measure_complexity(const FunctionUnit& unit);

}  // namespace breakpoint
