#pragma once

#include <stdexcept>
#include <string>

#include "darklattice/types.hpp"

namespace darklattice {

class EigenError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EigenDecomposition {
    CVector values;
    CMatrix vectors;  // right eigenvectors, columns
};

// General complex eigenproblem (LAPACK zgeev). Throws EigenError with a
// digest of the matrix on non-convergence.
EigenDecomposition eig(const CMatrix& A, bool want_vectors = true);

// Short hex digest of the matrix contents, for error reports and provenance.
std::string matrix_digest(const CMatrix& A);

// Pins the BLAS backend to one thread so results are bitwise reproducible.
void init_linalg();

} // namespace darklattice
