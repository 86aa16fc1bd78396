#pragma once

#include <cstddef>

#include "darklattice/types.hpp"

// Dense complex kernels on the hot paths of the time integrators.
// Every kernel has a scalar reference and an AVX2 variant; the public entry
// points dispatch at runtime.
namespace darklattice::kernels {

enum class Isa { Scalar, Avx2 };

bool avx2_supported();
Isa active_isa();
// Force a particular implementation (tests, benchmarking). Requesting Avx2 on
// a machine without it falls back to Scalar.
void set_isa(Isa isa);
const char* isa_name(Isa isa);

// y = A x, A column-major rows x cols with leading dimension lda.
void matvec(const cplx* A, std::size_t rows, std::size_t cols, std::size_t lda,
            const cplx* x, cplx* y);

// y += alpha * x
void axpy(std::size_t n, cplx alpha, const cplx* x, cplx* y);

// sum conj(x_i) y_i
cplx dotc(std::size_t n, const cplx* x, const cplx* y);

// sum |x_i|^2
double norm2(std::size_t n, const cplx* x);

namespace scalar {
void matvec(const cplx* A, std::size_t rows, std::size_t cols, std::size_t lda,
            const cplx* x, cplx* y);
void axpy(std::size_t n, cplx alpha, const cplx* x, cplx* y);
cplx dotc(std::size_t n, const cplx* x, const cplx* y);
double norm2(std::size_t n, const cplx* x);
} // namespace scalar

namespace avx2 {
void matvec(const cplx* A, std::size_t rows, std::size_t cols, std::size_t lda,
            const cplx* x, cplx* y);
void axpy(std::size_t n, cplx alpha, const cplx* x, cplx* y);
cplx dotc(std::size_t n, const cplx* x, const cplx* y);
double norm2(std::size_t n, const cplx* x);
} // namespace avx2

} // namespace darklattice::kernels
