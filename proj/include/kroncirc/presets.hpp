#pragma once

#include <string>

#include "kroncirc/sparse.hpp"

namespace kroncirc {

// H_k, the k-fold Kronecker power of [[1,1],[1,-1]]; H_k[x,y] = (-1)^<x,y>.
SparseMatrix walsh_hadamard(int k, const FieldSpec& field = FieldSpec::rationals());

// R_k, the k-fold Kronecker power of [[1,1],[1,0]]; R_k[x,y] = 1 iff x & y = 0.
SparseMatrix disjointness(int k, const FieldSpec& field = FieldSpec::rationals());

// [[1,1],[1,w]]; its n-th Kronecker power has entries w^<x,y>.
SparseMatrix omega_base(const FieldElement& w);

// A named base together with the elementary generator it is a power of;
// elem_power = k and matrix = elem^(x)k (k = 1 when nothing finer is known).
struct BaseSpec {
    std::string name;
    SparseMatrix matrix;
    SparseMatrix elem;
    int elem_power = 1;
};

// Grammar: h<k> | r<k> | i<k> | omega:<value> | file:<path>.
BaseSpec parse_base(const std::string& name, const FieldSpec& field = FieldSpec::rationals());

}  // namespace kroncirc
