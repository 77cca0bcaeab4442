#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace breakpoint::python {

enum class NodeKind : std::uint8_t {
  // structure
  Module,
  Block,
  ElseClause,
  FinallyClause,
  Decorators,
  Arguments,  // parameter list of def / lambda
  Param,
  CallArgs,  // class bases
  // statements
  FunctionDef,
  ClassDef,
  If,
  For,
  While,
  Try,
  ExceptHandler,
  With,
  WithItem,
  Match,
  MatchCase,
  Return,
  Assign,
  AugAssign,
  AnnAssign,
  ExprStmt,
  Pass,
  Break,
  Continue,
  Raise,
  Global,
  Nonlocal,
  Delete,
  Assert,
  Import,
  ImportFrom,
  Alias,
  // expressions
  Name,
  Constant,
  BinOp,
  UnaryOp,
  BoolOp,
  Compare,
  CmpOp,
  Call,
  Keyword,
  Starred,
  DoubleStarred,
  Attribute,
  Subscript,
  Slice,
  IfExp,
  Lambda,
  NamedExpr,
  Tuple,
  List,
  Set,
  Dict,
  DictItem,
  ListComp,
  SetComp,
  GeneratorExp,
  DictComp,
  Comprehension,
  Yield,
  YieldFrom,
  Await,
  MatchAs,
  Empty,  // placeholder for an absent optional child
};

// Node::flags bits.
inline constexpr std::uint32_t kAsync = 1U << 0;
inline constexpr std::uint32_t kElif = 1U << 1;        // If reached through `elif`
inline constexpr std::uint32_t kStringLit = 1U << 2;   // Constant: str literal
inline constexpr std::uint32_t kBytesLit = 1U << 3;    // Constant: bytes literal
inline constexpr std::uint32_t kFString = 1U << 4;     // Constant: f-string
inline constexpr std::uint32_t kStarParam = 1U << 5;   // Param: *args / bare *
inline constexpr std::uint32_t kDStarParam = 1U << 6;  // Param: **kwargs
inline constexpr std::uint32_t kSlashParam = 1U << 7;  // Param: positional-only marker
inline constexpr std::uint32_t kExceptStar = 1U << 8;

struct SourceRange {
  std::size_t begin = 0;  // byte offsets
  std::size_t end = 0;
  int line = 0;  // 1-based, inclusive
  int end_line = 0;
};

/// Generic syntax tree node. Child layout per kind:
///   FunctionDef  [Decorators, Arguments, returns|Empty, Block]; value=name
///   ClassDef     [Decorators, CallArgs, Block]; value=name
///   If           [test, Block, orelse]   orelse: Empty | ElseClause | If(kElif)
///   For          [target, iter, Block, Empty|ElseClause]
///   While        [test, Block, Empty|ElseClause]
///   Try          [Block, ExceptHandler..., ElseClause?, FinallyClause?]
///   ExceptHandler[type|Empty, Block]; value=bound name or ""
///   With         [WithItem..., Block];  WithItem [expr, target|Empty]
///   Match        [subject, MatchCase...]; MatchCase [pattern, guard|Empty, Block]
///   Assign       [target..., value]; AugAssign [target, value], value=op
///   AnnAssign    [target, annotation, value|Empty]
///   Import       [Alias...]; ImportFrom [Alias...], value=module, level=leading dots
///   Alias        value=dotted name, alt=as-name
///   Compare      [left, CmpOp, right, CmpOp, right...]
///   Call         [func, arg...]   args: expr | Keyword | Starred | DoubleStarred
///   Attribute    [object]; value=attribute name
///   Subscript    [object, index]; Slice [lower|Empty, upper|Empty, step|Empty]
///   IfExp        [body, test, orelse]; Lambda [Arguments, body]
///   Dict         [DictItem|DoubleStarred...]; DictItem [key, value]
///   *Comp        [element(s), Comprehension...]; Comprehension [target, iter, if...]
///   Param        [annotation|Empty, default|Empty]; value=name
/// Constants keep their verbatim source text (adjacent string literals merged).
struct Node {
  NodeKind kind = NodeKind::Empty;
  std::string value;
  std::string alt;
  std::uint32_t flags = 0;
  int level = 0;
  SourceRange range;
  std::size_t colon = 0;  // offset of the header colon for def/class
  std::vector<Node> children;

  bool empty() const { return kind == NodeKind::Empty; }
  bool has(std::uint32_t flag) const { return (flags & flag) != 0; }
};

}  // namespace breakpoint::python
