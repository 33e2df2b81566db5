#pragma once

#include <string>
#include <vector>

#include "focq/expr.hpp"
#include "focq/generators.hpp"
#include "focq/structure.hpp"

namespace focq {

// Graphs are given on vertices 0..n-1; vertex i stands for i+1 in the
// encodings: in the tree it is the a-vertex with i+2 b-neighbours, in the
// string the a-position followed by i+1 c's.

struct TreeEncoding {
  Structure tree;
  std::vector<char> roles;  // per element: 'r', 'a', 'b', 'c', 'd' or 'e'
  int height = 0;           // from the root
};

TreeEncoding encode_tree(std::size_t n, const std::vector<Edge>& edges);

// Formula with the single free variable x defining the vertices of the
// given role in every tree encoding.
Expr tree_role_formula(char role, Var x);

// Sentence over {E} evaluated on G -> sentence with eq(.,.) evaluated on
// the tree encoding. Only E, equality and the Boolean/quantifier core are
// accepted.
Expr rewrite_tree_formula(const Expr& phi);

struct StringEncoding {
  Structure structure;  // relations Le (linear order), Pa, Pb, Pc
  std::string word;
};

StringEncoding encode_string(std::size_t n, const std::vector<Edge>& edges);
Expr rewrite_string_formula(const Expr& phi);

Signature tree_signature();
Signature string_signature();

}  // namespace focq
